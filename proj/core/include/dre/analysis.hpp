#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dre/reduced_model.hpp"

namespace dre {

/// Sampled estimates of the Lipschitz constant and the one-sided Lipschitz
/// constant of a map over a point cloud. Both are maxima over finitely many
/// pairs and therefore lower bounds of the true suprema; for nested pair sets
/// they grow monotonically.
struct LipschitzReport {
  double L = 0.0;   // max ||f(a)-f(b)|| / ||a-b||
  double nu = 0.0;  // max <f(a)-f(b), a-b> / ||a-b||^2 (negative = dissipative)
  long pairs = 0;   // pairs actually evaluated
  std::string domain;         // which point cloud was probed
  Vector arg_a_L, arg_b_L;    // pair attaining L
  Vector arg_a_nu, arg_b_nu;  // pair attaining nu
};

/// Evaluates f on all consecutive pairs (states[i], states[i+1]) plus
/// `random_pairs` seeded random index pairs. The random pairs come
/// sequentially from one stream, so enlarging random_pairs with the same
/// seed only adds pairs and the estimates never decrease. Coincident points
/// are skipped.
LipschitzReport estimate_lipschitz(
    const std::function<Vector(const Vector&)>& f,
    const std::vector<Vector>& states, int random_pairs, std::uint64_t seed,
    std::string domain = "");

/// Largest step size for which a dissipative system (nu < 0) with Lipschitz
/// constant L keeps the explicit Euler contraction argument: 2 |nu| / L^2.
/// Throws if nu >= 0 or L <= 0.
double b_stability_dt_bound(double L, double nu);

/// Constants and perturbation magnitudes of the reconstruction bound
///   L_psi (L_psi_prime ||Delta0|| + ||delta0|| / Ks
///          + (M_jac ||Delta|| + ||delta|| / Ks) t) exp(L_fn t).
/// Capital entries live in the full space, lower-case ones in the latent
/// space; only the latter are damped by the scaling factor.
struct LyapunovInputs {
  double L_psi = 1.0;        // decoder Lipschitz constant
  double L_psi_prime = 1.0;  // encoder Lipschitz constant
  double M_jac = 1.0;        // bound on the encoder Jacobian over the manifold
  double L_fn = 1.0;         // Lipschitz constant of the reduced rhs
  double Ks = 1.0;
  double Delta0 = 0.0;  // ||Delta_0||, initial full-space perturbation
  double delta0 = 0.0;  // ||delta_0||, initial latent perturbation
  double Delta = 0.0;   // sup_t ||Delta(t)||
  double delta = 0.0;   // sup_t ||delta(t)||
};
double lyapunov_bound_at(const LyapunovInputs& in, double t);
Vector lyapunov_bound_curve(const LyapunovInputs& in,
                            const std::vector<double>& ts);

/// Perturbations of a reduced solve: explicit initial offsets plus
/// piecewise-constant-in-time right-hand-side offsets whose components are
/// redrawn uniformly from [lo, hi] on every step.
struct PerturbationSpec {
  Vector Delta0;  // initial full-space offset (empty = zero)
  Vector delta0;  // initial latent offset (empty = zero)
  double Delta_lo = 0.0, Delta_hi = 0.0;  // full-space rhs offset components
  double delta_lo = 0.0, delta_hi = 0.0;  // latent rhs offset components
  std::uint64_t seed = 0;
};

/// Bound curve and observed error curve on one shared time grid.
struct BoundReport {
  std::string name;
  std::vector<double> times;
  Vector bound;       // Lyapunov curve with the realized magnitudes
  Vector error;       // ||w_N(t) - u_N(t)||_2 against the reference solution
  Matrix perturbed;   // reconstructed perturbed trajectory, one row per time
  bool diverged = false;
  long divergence_step = -1;
  double divergence_time = 0.0;
  double realized_Delta0 = 0.0, realized_delta0 = 0.0;
  double realized_Delta_sup = 0.0, realized_delta_sup = 0.0;
};

/// Integrates the perturbed reduced system
///   w' = F_n(w) + J_encode(decode(w)) Delta(t) + delta(t),
///   w(0) = encode(u_0(mu) + Delta_0) + delta_0,
/// reconstructs it, and reports the reconstruction error against the
/// adaptive reference solution of the full problem together with the bound
/// curve evaluated at the realized perturbation sizes. Divergence is
/// reported in the result instead of thrown (stability experiments probe it).
BoundReport perturbed_integrate(const ReducedModel& model, const Vector& mu,
                                const FixedGrid& grid, const SchemeSpec& scheme,
                                const PerturbationSpec& pert,
                                LyapunovInputs constants,
                                double ref_atol = 1e-12, double ref_rtol = 1e-10);

}  // namespace dre
