#pragma once

#include <array>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "dre/common.hpp"

namespace dre {

/// Right-hand side f(t, u). The systems here are autonomous but perturbation
/// experiments add explicit time dependence.
using Rhs = std::function<Vector(double, const Vector&)>;

enum class SchemeKind { FE, AB2, RK4, RK45Ref };

/// Explicit scheme description. FE and AB2 are linear multistep methods
/// written as  sum_p alpha_p u^{k+1-p} = dt * sum_p beta_p f(u^{k+1-p}),
/// p = 0..P; RK4 is the classic four-stage method; RK45Ref names the adaptive
/// reference integrator (integrate_reference) and is rejected by the fixed
/// driver.
///
/// `gamma` carries one-sided starting-condition coefficients of matching
/// order (sum_p gamma_p u^{k+p} = dt f(u^k)); the driver realizes the same
/// order with the starter named in `starter` (AB2: one Heun predictor step),
/// which is recorded in run metadata.
struct SchemeSpec {
  SchemeKind kind = SchemeKind::FE;
  std::string name = "fe";
  int P = 1;
  std::vector<double> alpha, beta, gamma;
  std::string starter;
  int order = 1;

  static const SchemeSpec& fe();
  static const SchemeSpec& ab2();
  static const SchemeSpec& rk4();
  static const SchemeSpec& rk45ref();
  static const SchemeSpec& by_name(const std::string& name);
};

struct FixedGrid {
  double dt = 0.0;
  long K = 0;  // number of steps; the trajectory has K+1 rows
  FixedGrid(double dt, long K) : dt(dt), K(K) {
    if (!(dt > 0.0)) throw std::invalid_argument("FixedGrid: dt must be positive");
    if (K < 1) throw std::invalid_argument("FixedGrid: K must be at least 1");
  }
};

/// Max-norm threshold beyond which a trajectory counts as diverged.
inline constexpr double kDivergenceThreshold = 1e12;

/// Integrates u' = rhs(t, u) from t = 0 with an explicit scheme.
/// Returns a (K+1) x dim matrix of states; row k is u(k * dt).
/// Throws DivergenceError (with the step index) on non-finite or huge states.
Matrix integrate_fixed(const Rhs& rhs, const Vector& u0, const FixedGrid& grid,
                       const SchemeSpec& scheme);

/// Adaptive Dormand-Prince 5(4) solution with a quartic dense-output
/// interpolant per accepted step.
class DenseSolution {
 public:
  Vector sample(double t) const;
  /// Samples at t = k*dt for k = 0..K into a (K+1) x dim matrix.
  Matrix sample_grid(double dt, long K) const;
  double t_begin() const { return ts_.front(); }
  double t_end() const { return ts_.back(); }
  long n_steps() const { return static_cast<long>(ts_.size()) - 1; }

 private:
  friend DenseSolution integrate_reference(const Rhs&, const Vector&, double,
                                           double, double, double);
  std::vector<double> ts_;                      // accepted step boundaries
  std::vector<std::array<Vector, 5>> rcont_;    // interpolant coefficients per interval
};

/// Reference integration with tight tolerances (defaults follow the data
/// generation settings used throughout: atol 1e-16, rtol 1e-12).
DenseSolution integrate_reference(const Rhs& rhs, const Vector& u0, double t0,
                                  double t1, double atol = 1e-16,
                                  double rtol = 1e-12);

/// Largest dt with max_i |1 + dt*lambda_i| < 1 for a strictly stable spectrum
/// (all real parts negative; throws otherwise). Real spectra use the closed
/// form 2/max|lambda|; complex spectra are solved by bisection on the
/// max-modulus condition.
double fe_stability_max_dt(const std::vector<std::complex<double>>& eigenvalues);

}  // namespace dre
