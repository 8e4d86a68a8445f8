#pragma once

#include <optional>
#include <string>

#include "dre/autoencoder.hpp"
#include "dre/integrators.hpp"
#include "dre/problems.hpp"

namespace dre {

enum class RhsMode { Exact, Learned };
enum class ShiftMode { None, ZeroInitial };

/// A trained reduction: autoencoder, reduced right-hand side and the metadata
/// needed to reproduce an evaluation. The exact mode differentiates the
/// encoder along F_N; the learned mode evaluates the trained network on
/// [u_n; mu scaled to [0,1]].
struct ReducedModel {
  Autoencoder ae;
  RhsMode mode = RhsMode::Exact;
  ShiftMode shift_mode = ShiftMode::None;
  std::optional<Mlp> fn;  // set in learned mode
  OdeProblem problem;
  double dt_train = 0.0;
  std::string scheme_name = "fe";

  Vector scale_mu(const Vector& mu) const;

  /// Reduced rhs for one parameter value, as an integrator callback.
  /// The shift policy is applied by the caller through initial_latent().
  Rhs reduced_rhs(const Vector& mu) const;

  /// Latent initial condition for mu; applies the shift policy to `ae_out`
  /// (the autoencoder actually used, returned so callers decode consistently).
  Vector initial_latent(const Vector& mu, Autoencoder& ae_out) const;

  /// Decodes a reduced trajectory (rows are latent states) with `ae_used`.
  Matrix reconstruct(const Matrix& reduced, const Autoencoder& ae_used) const;

  /// Integrates the reduced problem for mu and returns the reconstruction.
  Matrix solve_reconstructed(const Vector& mu, const FixedGrid& grid,
                             const SchemeSpec& scheme) const;
};

/// Exact-mode model with a different latent scaling (learned networks are
/// tied to their training frame, so only exact mode may be rescaled).
ReducedModel with_scaling(const ReducedModel& model, double Ks);

/// Bundle layout: <dir>/bundle.json referencing encoder/decoder/fn
/// checkpoints by relative path, plus normalization and metadata.
void save_bundle(const ReducedModel& model, const std::string& dir);
ReducedModel load_bundle(const std::string& dir);

}  // namespace dre
