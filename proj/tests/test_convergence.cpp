#include <cmath>

#include "doctest.h"
#include "dre/convergence.hpp"
#include "dre/integrators.hpp"

using namespace dre;

namespace {

// Scalar decay with a per-sample initial condition; closed-form reference.
double ic_of(std::size_t sample) { return 1.0 + 0.5 * static_cast<double>(sample); }

Matrix decay_reference(std::size_t sample, const std::vector<double>& ts) {
  Matrix out(static_cast<Eigen::Index>(ts.size()), 1);
  for (std::size_t j = 0; j < ts.size(); ++j)
    out(static_cast<Eigen::Index>(j), 0) = ic_of(sample) * std::exp(-ts[j]);
  return out;
}

}  // namespace

TEST_SUITE("convergence") {

TEST_CASE("a forward euler sweep recovers first order on the shared grid") {
  SweepConfig cfg;
  cfg.dt_base = 0.1;
  cfg.s_min = -3;
  cfg.s_max = 1;
  cfg.T = 1.0;
  cfg.expected_order = 1;

  auto solve = [](std::size_t sample, double dt, long K) {
    Rhs rhs = [](double, const Vector& u) -> Vector { return -u; };
    Vector u0(1);
    u0 << ic_of(sample);
    return integrate_fixed(rhs, u0, FixedGrid(dt, K), SchemeSpec::fe());
  };

  SweepResult res = convergence_sweep(2, solve, decay_reference, cfg);
  REQUIRE(res.rows.size() == 5);
  // Rows ascend in dt from dt_base 2^-3 to dt_base 2^1.
  CHECK(res.rows.front().dt == doctest::Approx(0.0125).epsilon(1e-15));
  CHECK(res.rows.back().dt == doctest::Approx(0.2).epsilon(1e-15));
  for (std::size_t k = 1; k < res.rows.size(); ++k) {
    CHECK(res.rows[k].dt == doctest::Approx(2.0 * res.rows[k - 1].dt));
    CHECK(!res.rows[k].diverged);
  }
  // The shared evaluation grid is spanned by the largest step.
  REQUIRE(res.eval_times.size() == 6);
  CHECK(res.eval_times[1] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(res.eval_times.back() == doctest::Approx(1.0).epsilon(1e-15));

  CHECK(res.fit_points == 5);
  CHECK(res.fitted_slope == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("diverged rows are marked and skipped by the slope fit") {
  SweepConfig cfg;
  cfg.dt_base = 0.1;
  cfg.s_min = -2;
  cfg.s_max = 1;
  cfg.T = 1.0;
  cfg.expected_order = 1;

  auto solve = [](std::size_t sample, double dt, long K) {
    if (dt > 0.15) throw DivergenceError(1, dt, "synthetic divergence");
    Rhs rhs = [](double, const Vector& u) -> Vector { return -u; };
    Vector u0(1);
    u0 << ic_of(sample);
    return integrate_fixed(rhs, u0, FixedGrid(dt, K), SchemeSpec::fe());
  };

  SweepResult res = convergence_sweep(1, solve, decay_reference, cfg);
  REQUIRE(res.rows.size() == 4);
  CHECK(res.rows.back().diverged);
  CHECK(!res.rows[2].diverged);
  CHECK(res.fit_points == 3);
  CHECK(res.fitted_slope == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("the slope fit stops where the error plateaus") {
  // Synthetic error model e(dt) proportional to dt + 0.01: the smallest step
  // sits on the plateau and its local ratio disqualifies it from the fit.
  SweepConfig cfg;
  cfg.dt_base = 0.1;
  cfg.s_min = -3;
  cfg.s_max = 1;
  cfg.T = 1.0;
  cfg.expected_order = 1;

  auto solve = [](std::size_t, double dt, long K) {
    Matrix out(K + 1, 1);
    for (long k = 0; k <= K; ++k)
      out(k, 0) = std::exp(-k * dt) + (dt + 0.01);
    return out;
  };
  auto reference = [](std::size_t, const std::vector<double>& ts) {
    Matrix out(static_cast<Eigen::Index>(ts.size()), 1);
    for (std::size_t j = 0; j < ts.size(); ++j)
      out(static_cast<Eigen::Index>(j), 0) = std::exp(-ts[j]);
    return out;
  };

  SweepResult res = convergence_sweep(1, solve, reference, cfg);
  REQUIRE(res.rows.size() == 5);
  CHECK(res.fit_points == 4);
  CHECK(res.fitted_slope == doctest::Approx(0.85).epsilon(0.15));
  CHECK(res.fitted_slope < 1.0);
}

TEST_CASE("global error bound evaluates its closed form") {
  GlobalErrorInputs in;
  in.L_psi = 2.0;
  in.L_fn = 0.5;
  in.T = 2.0;
  in.eps_psi = 0.01;
  in.eps_psi_prime = 0.02;
  in.eps_fn = 0.03;
  in.C1 = 1.5;
  in.order = 2;
  const double expect =
      2.0 * (0.02 + 0.03 * 2.0) * std::exp(0.5 * 2.0) + 2.0 * 1.5 * 0.01 + 0.01;
  CHECK(global_error_bound(in, 0.1) == doctest::Approx(expect).epsilon(1e-14));

  // Halving dt shrinks only the scheme term, at the scheme's order.
  const double b1 = global_error_bound(in, 0.1);
  const double b2 = global_error_bound(in, 0.05);
  const double net = 2.0 * (0.02 + 0.03 * 2.0) * std::exp(1.0) + 0.01;
  CHECK((b1 - net) / (b2 - net) == doctest::Approx(4.0).epsilon(1e-10));
}

}  // TEST_SUITE("convergence")
