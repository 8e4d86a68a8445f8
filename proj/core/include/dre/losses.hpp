#pragma once

#include <utility>
#include <vector>

#include "dre/autoencoder.hpp"
#include "dre/integrators.hpp"

namespace dre {

/// Gradient accumulators for loss evaluations, one flat vector per network.
/// Item losses size-and-zero a field on first touch and accumulate after
/// that, so one LossGrads can collect several weighted terms.
struct LossGrads {
  Vector encoder, decoder, fn;

  LossGrads& operator+=(const LossGrads& o);
  LossGrads operator+(const LossGrads& o) const {
    LossGrads r = *this;
    r += o;
    return r;
  }
  void scale(double s);
};

/// Squared reconstruction error of one snapshot in standardized units,
///   weight * || norm(u) - dec(enc(norm(u))) ||^2.
/// Ks and the latent shift cancel inside the reconstruction, so the value is
/// frame independent. Gradients (scaled by weight) go to encoder and decoder.
double loss_autoencoder_item(const Autoencoder& ae, const Vector& u,
                             LossGrads* grads, double weight = 1.0);

/// Mean of loss_autoencoder_item over a batch (weight 1/batch size).
double loss_autoencoder(const Autoencoder& ae,
                        const std::vector<const Vector*>& batch,
                        LossGrads* grads);

/// Network input of the reduced right-hand side, [encode(u); mu_hat].
/// Constant while the autoencoder is frozen, so callers may precompute it.
Vector semi_input(const Autoencoder& ae, const Vector& u, const Vector& mu_hat);

/// Regression target of the derivative-matching strategy,
/// J_encode(u) F_N(u) evaluated as a jvp; also precomputable.
Vector semi_target(const Autoencoder& ae, const Vector& u, const Vector& rhs);

/// Squared derivative-matching error of one snapshot with the autoencoder
/// frozen: weight * || fn(input) - target ||^2. Gradients go to fn only.
double loss_semi_item(const Mlp& fn, const Vector& input, const Vector& target,
                      LossGrads* grads, double weight = 1.0);

/// Mean of loss_semi_item over parallel snapshot/parameter/rhs batches.
double loss_semi(const Mlp& fn, const Autoencoder& ae,
                 const std::vector<const Vector*>& us,
                 const std::vector<const Vector*>& mu_hats,
                 const std::vector<const Vector*>& rhss, LossGrads* grads);

/// Squared multistep residual of one time window (newest first,
/// window[p] = u^{q-p}, P+1 entries for a P-step scheme):
///   weight * || sum_p alpha_p z_p - dt sum_p beta_p fn([z_p; mu_hat]) ||^2
/// with z_p = encode(window[p]). Encoder outputs enter as values only
/// (stop-gradient): gradients go to fn alone. Multistep schemes only.
double loss_residual_item(const Mlp& fn, const Autoencoder& ae,
                          const std::vector<const Vector*>& window,
                          const Vector& mu_hat, const SchemeSpec& scheme,
                          double dt, LossGrads* grads, double weight = 1.0);

/// Conservation penalty of one snapshot in raw units. Componentwise form:
///   weight * sum_k ([u]_k - [reconstruct(u)]_k)^2;
/// mass-defect variant: weight * (sum_k [u]_k - sum_k [reconstruct(u)]_k)^2.
double loss_conservation_item(const Autoencoder& ae, const Vector& u,
                              bool mass_defect_variant, LossGrads* grads,
                              double weight = 1.0);

/// weight * || (E^T E) D - E^T ||_F^2 where E (N x n) and D (n x N) are the
/// transposed encoder/decoder weight matrices in the standardized frame.
/// Exactly zero when the decoder weights form the Moore-Penrose
/// pseudo-inverse of the encoder weights. Requires both networks to be a
/// single Linear layer with identity activation.
double loss_orthogonality(const Autoencoder& ae, LossGrads* grads,
                          double weight = 1.0);

/// Hinge penalty pushing the sampled one-sided Lipschitz quotient of fn
/// below `margin`. Pairs are full network inputs sharing their trailing
/// parameter entries; the state part is the leading output_dim components:
///   weight * mean_pairs max(0, <fn(a)-fn(b), sa-sb>/||sa-sb||^2 - margin).
/// Off by default in every preset.
double loss_dissipativity(const Mlp& fn,
                          const std::vector<std::pair<Vector, Vector>>& pairs,
                          double margin, LossGrads* grads, double weight = 1.0);

}  // namespace dre
