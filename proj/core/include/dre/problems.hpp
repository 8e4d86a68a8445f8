#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dre/common.hpp"
#include "dre/integrators.hpp"

namespace dre {

/// Parametric initial value problem u' = F(u; mu), u(0) = u0(mu).
struct OdeProblem {
  std::string name;
  int dim = 0;        // state dimension N
  int param_dim = 0;  // size of mu
  Matrix param_box;   // param_dim x 2, columns are lower/upper bounds
  double default_T = 1.0;
  std::function<Vector(const Vector& u, const Vector& mu)> rhs;
  std::function<Vector(const Vector& mu)> initial;

  // Linear problems expose their matrix so spectra and stability bounds can
  // be computed exactly.
  bool is_linear = false;
  Matrix A;

  Rhs rhs_at(const Vector& mu) const {
    auto f = rhs;
    Vector m = mu;
    return [f, m](double, const Vector& u) { return f(u, m); };
  }
};

/// u' = A u with a caller-supplied initial-condition map.
OdeProblem linear_problem(std::string name, Matrix A,
                          std::function<Vector(const Vector&)> initial,
                          Matrix param_box, double T);

/// Classic SIR with population 100: S' = -(beta/100) I S, I' = (beta/100) I S - gamma I,
/// R' = gamma I; gamma fixed to 0.5, beta = mu in [0.5, 2.5], u0 = (90, 10, 0), T = 20.
OdeProblem sir_problem();

/// Mass-action network with 19 species and 6 reactions, rhs = S r(u) with
/// r_j = k_j * prod_i u_i^{|S_ij|} over reactant species (S_ij < 0).
/// mu = (mu1, mu2): mu1 in [0.74, 0.94] is the second species' initial value,
/// mu2 = k_2 in [5, 11]. Every column of S sums to zero, so total
/// concentration is conserved (about 11.67 at the middle of the mu1 range).
OdeProblem chemistry_problem();

/// Stoichiometric matrix of chemistry_problem (19 x 6).
const Matrix& chemistry_stoichiometry();

/// Reaction rates r(u; k) of chemistry_problem.
Vector chemistry_rates(const Vector& u, const Vector& k);

/// Named presets: "test1-linear", "test1-nonlinear", "test1-nonlinear-N100",
/// "test1-nonlinear-N500", "sir", "chemistry".
OdeProblem make_problem(const std::string& name);
std::vector<std::string> problem_names();

/// Min-max scaling of mu to [0, 1]^m by the problem's parameter box
/// (degenerate bounds map to 0). Networks always see parameters this way.
Vector scale_mu01(const OdeProblem& problem, const Vector& mu);

/// Point clouds on static manifolds for autoencoder studies.
struct StaticManifold {
  std::string name;
  int ambient_dim = 3;
  int intrinsic_dim = 1;
  /// Deterministic: same (count, seed) yields the same count x ambient_dim matrix.
  std::function<Matrix(int count, std::uint64_t seed)> sample;
};

/// Named manifolds: "flat-line", "graph", "coil", "noisy-coil".
/// The coil is (r cos t, r sin t, 0.2 t) with r = 2pi/(2pi + t), t in [0, 6pi];
/// the noisy variant adds a radial oscillation 0.05 sin(4 t) (12 periods).
StaticManifold make_manifold(const std::string& name);
std::vector<std::string> manifold_names();

}  // namespace dre
