#include <cmath>
#include <complex>

#include "doctest.h"
#include "dre/integrators.hpp"

using namespace dre;

namespace {

Rhs scalar_decay() {
  return [](double, const Vector& u) -> Vector { return -u; };
}

// Fitted slope of log2(err) against log2(dt) over a dt ladder.
double order_slope(const SchemeSpec& scheme, const Matrix& A, const Vector& u0,
                   double T, const std::vector<double>& dts) {
  Rhs rhs = [&A](double, const Vector& u) -> Vector { return A * u; };
  std::vector<double> xs, ys;
  for (double dt : dts) {
    const long K = static_cast<long>(std::llround(T / dt));
    Matrix traj = integrate_fixed(rhs, u0, FixedGrid(dt, K), scheme);
    // Exact solution of the diagonal system at the final time.
    Vector exact(u0.size());
    for (Eigen::Index i = 0; i < u0.size(); ++i)
      exact[i] = u0[i] * std::exp(A(i, i) * T);
    xs.push_back(std::log2(dt));
    ys.push_back(std::log2((traj.row(K).transpose() - exact).norm()));
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_SUITE("integrators") {

TEST_CASE("scheme table exposes the multistep coefficients") {
  const auto& fe = SchemeSpec::fe();
  CHECK(fe.P == 1);
  CHECK(fe.order == 1);
  CHECK(fe.alpha == std::vector<double>{1.0, -1.0});
  CHECK(fe.beta == std::vector<double>{0.0, 1.0});

  const auto& ab2 = SchemeSpec::ab2();
  CHECK(ab2.P == 2);
  CHECK(ab2.order == 2);
  CHECK(ab2.alpha == std::vector<double>{1.0, -1.0, 0.0});
  CHECK(ab2.beta == std::vector<double>{0.0, 1.5, -0.5});
  CHECK(ab2.starter == "heun");
  // One-sided starting condition of matching order.
  CHECK(ab2.gamma == std::vector<double>{-1.5, 2.0, -0.5});

  CHECK(SchemeSpec::rk4().order == 4);
  CHECK(SchemeSpec::rk4().beta.empty());

  CHECK(&SchemeSpec::by_name("fe") == &fe);
  CHECK(&SchemeSpec::by_name("rk45ref") == &SchemeSpec::rk45ref());
  CHECK_THROWS_AS(SchemeSpec::by_name("euler"), std::invalid_argument);
}

TEST_CASE("fixed grid rejects degenerate parameters") {
  CHECK_THROWS_AS(FixedGrid(0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(FixedGrid(-0.1, 5), std::invalid_argument);
  CHECK_THROWS_AS(FixedGrid(0.1, 0), std::invalid_argument);
  CHECK_NOTHROW(FixedGrid(0.1, 1));
}

TEST_CASE("forward euler reproduces two hand steps of u' = -u") {
  Vector u0(1);
  u0 << 1.0;
  Matrix traj = integrate_fixed(scalar_decay(), u0, FixedGrid(0.5, 2),
                                SchemeSpec::fe());
  CHECK(traj.rows() == 3);
  CHECK(traj(0, 0) == 1.0);
  CHECK(traj(1, 0) == 0.5);
  CHECK(traj(2, 0) == 0.25);
}

TEST_CASE("ab2 starts with one heun step and then uses the two-step formula") {
  Vector u0(1);
  u0 << 1.0;
  Matrix traj = integrate_fixed(scalar_decay(), u0, FixedGrid(0.1, 2),
                                SchemeSpec::ab2());
  // Heun: u1 = u0 + dt/2 (f(u0) + f(u0 + dt f(u0))) = 1 + 0.05(-1 - 0.9).
  CHECK(traj(1, 0) == doctest::Approx(0.905).epsilon(1e-15));
  // AB2:  u2 = u1 + dt (3/2 f(u1) - 1/2 f(u0)).
  CHECK(traj(2, 0) == doctest::Approx(0.81925).epsilon(1e-15));
}

TEST_CASE("rk4 reproduces the classic one-step tableau by hand") {
  Vector u0(1);
  u0 << 1.0;
  Matrix traj = integrate_fixed(scalar_decay(), u0, FixedGrid(0.1, 1),
                                SchemeSpec::rk4());
  CHECK(traj(1, 0) == doctest::Approx(0.9048375).epsilon(1e-14));
  // Five digits beyond the exact flow exp(-0.1) = 0.90483741...
  CHECK(std::abs(traj(1, 0) - std::exp(-0.1)) < 1e-7);
}

TEST_CASE("the fixed driver rejects the adaptive scheme") {
  Vector u0 = Vector::Ones(1);
  CHECK_THROWS_AS(integrate_fixed(scalar_decay(), u0, FixedGrid(0.1, 1),
                                  SchemeSpec::rk45ref()),
                  std::invalid_argument);
}

TEST_CASE("divergence raises with the offending step and time") {
  Rhs growth = [](double, const Vector& u) -> Vector { return 100.0 * u; };
  Vector u0 = Vector::Ones(1);
  try {
    integrate_fixed(growth, u0, FixedGrid(1.0, 50), SchemeSpec::fe());
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    // 101^k crosses 1e12 at k = 6.
    CHECK(e.step == 6);
    CHECK(e.t == doctest::Approx(6.0));
  }

  Rhs nan_rhs = [](double, const Vector& u) -> Vector {
    return Vector::Constant(u.size(), std::nan(""));
  };
  CHECK_THROWS_AS(
      integrate_fixed(nan_rhs, u0, FixedGrid(1.0, 2), SchemeSpec::fe()),
      DivergenceError);
}

TEST_CASE("empirical orders on a stable diagonal system match the schemes") {
  Matrix A = Matrix::Zero(3, 3);
  A.diagonal() << -3.0, -5.0, -5.0;
  Vector u0(3);
  u0 << 1.0, 1.0, 1.0;
  std::vector<double> dts = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  CHECK(order_slope(SchemeSpec::fe(), A, u0, 1.0, dts) ==
        doctest::Approx(1.0).epsilon(0.08));
  CHECK(order_slope(SchemeSpec::ab2(), A, u0, 1.0, dts) ==
        doctest::Approx(2.0).epsilon(0.08));
  CHECK(order_slope(SchemeSpec::rk4(), A, u0, 1.0, dts) ==
        doctest::Approx(4.0).epsilon(0.08));
}

TEST_CASE("reference solution carries a dense interpolant") {
  Vector u0(1);
  u0 << 1.0;
  DenseSolution sol = integrate_reference(scalar_decay(), u0, 0.0, 2.0);
  CHECK(sol.t_begin() == 0.0);
  CHECK(sol.t_end() == 2.0);
  CHECK(sol.n_steps() >= 1);
  CHECK(sol.sample(1.0)[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  CHECK(sol.sample(1.7)[0] == doctest::Approx(std::exp(-1.7)).epsilon(1e-10));

  Matrix grid = sol.sample_grid(0.5, 4);
  CHECK(grid.rows() == 5);
  CHECK(grid(0, 0) == 1.0);
  CHECK(grid(3, 0) == doctest::Approx(std::exp(-1.5)).epsilon(1e-10));
}

TEST_CASE("reference solution tracks an oscillator over many periods") {
  // u'' = -u as a first-order system; energy is conserved exactly.
  Rhs osc = [](double, const Vector& u) -> Vector {
    Vector f(2);
    f << u[1], -u[0];
    return f;
  };
  Vector u0(2);
  u0 << 1.0, 0.0;
  DenseSolution sol = integrate_reference(osc, u0, 0.0, 20.0);
  Vector uT = sol.sample(20.0);
  CHECK(uT[0] == doctest::Approx(std::cos(20.0)).epsilon(1e-9));
  CHECK(uT[1] == doctest::Approx(-std::sin(20.0)).epsilon(1e-9));
}

TEST_CASE("fe stability bound is 2 over the largest magnitude for real spectra") {
  std::vector<std::complex<double>> spec = {{-3.0, 0.0}, {-5.0, 0.0}, {-5.0, 0.0}};
  CHECK(fe_stability_max_dt(spec) == doctest::Approx(0.4).epsilon(1e-12));

  // For a complex pair the bisection must land on -2 Re / |lambda|^2.
  std::vector<std::complex<double>> pair = {{-1.0, 2.0}, {-1.0, -2.0}};
  CHECK(fe_stability_max_dt(pair) == doctest::Approx(0.4).epsilon(1e-8));

  std::vector<std::complex<double>> unstable = {{0.5, 0.0}};
  CHECK_THROWS_AS(fe_stability_max_dt(unstable), std::exception);
}

}  // TEST_SUITE("integrators")
