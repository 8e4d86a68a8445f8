#include "dre/integrators.hpp"

#include <algorithm>
#include <cmath>

namespace dre {

const SchemeSpec& SchemeSpec::fe() {
  static const SchemeSpec s{SchemeKind::FE, "fe", 1, {1.0, -1.0}, {0.0, 1.0}, {}, "", 1};
  return s;
}

const SchemeSpec& SchemeSpec::ab2() {
  // Starting condition of matching order: -3/2 u^k + 2 u^{k+1} - 1/2 u^{k+2} = dt f(u^k);
  // the driver supplies u^1 with one Heun predictor step instead.
  static const SchemeSpec s{SchemeKind::AB2, "ab2",          2,
                            {1.0, -1.0, 0.0}, {0.0, 1.5, -0.5}, {-1.5, 2.0, -0.5},
                            "heun",           2};
  return s;
}

const SchemeSpec& SchemeSpec::rk4() {
  static const SchemeSpec s{SchemeKind::RK4, "rk4", 1, {1.0, -1.0}, {}, {}, "", 4};
  return s;
}

const SchemeSpec& SchemeSpec::rk45ref() {
  static const SchemeSpec s{SchemeKind::RK45Ref, "rk45ref", 1, {}, {}, {}, "", 5};
  return s;
}

const SchemeSpec& SchemeSpec::by_name(const std::string& name) {
  if (name == "fe") return fe();
  if (name == "ab2") return ab2();
  if (name == "rk4") return rk4();
  if (name == "rk45ref") return rk45ref();
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

namespace {

void check_state(const Vector& u, long step, double t) {
  if (!u.allFinite() || u.lpNorm<Eigen::Infinity>() > kDivergenceThreshold)
    throw DivergenceError(step, t,
                          "integration diverged at step " + std::to_string(step) +
                              " (t = " + std::to_string(t) + ")");
}

}  // namespace

Matrix integrate_fixed(const Rhs& rhs, const Vector& u0, const FixedGrid& grid,
                       const SchemeSpec& scheme) {
  if (scheme.kind == SchemeKind::RK45Ref)
    throw std::invalid_argument(
        "integrate_fixed: rk45ref is adaptive, use integrate_reference");
  const double dt = grid.dt;
  Matrix out(grid.K + 1, u0.size());
  out.row(0) = u0;
  check_state(u0, 0, 0.0);

  if (scheme.kind == SchemeKind::RK4) {
    Vector u = u0;
    for (long k = 0; k < grid.K; ++k) {
      const double t = k * dt;
      Vector k1 = rhs(t, u);
      Vector k2 = rhs(t + 0.5 * dt, u + 0.5 * dt * k1);
      Vector k3 = rhs(t + 0.5 * dt, u + 0.5 * dt * k2);
      Vector k4 = rhs(t + dt, u + dt * k3);
      u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      check_state(u, k + 1, t + dt);
      out.row(k + 1) = u;
    }
    return out;
  }

  if (scheme.kind == SchemeKind::FE) {
    Vector u = u0;
    for (long k = 0; k < grid.K; ++k) {
      const double t = k * dt;
      u += dt * rhs(t, u);
      check_state(u, k + 1, t + dt);
      out.row(k + 1) = u;
    }
    return out;
  }

  // AB2: u^{k+1} = u^k + dt (3/2 f^k - 1/2 f^{k-1}); u^1 from a Heun step.
  Vector u_prev = u0;
  Vector f_prev = rhs(0.0, u_prev);
  Vector pred = u_prev + dt * f_prev;
  Vector u = u_prev + 0.5 * dt * (f_prev + rhs(dt, pred));
  check_state(u, 1, dt);
  out.row(1) = u;
  for (long k = 1; k < grid.K; ++k) {
    const double t = k * dt;
    Vector f = rhs(t, u);
    Vector next = u + dt * (1.5 * f - 0.5 * f_prev);
    check_state(next, k + 1, t + dt);
    out.row(k + 1) = next;
    u_prev = std::move(u);
    f_prev = std::move(f);
    u = std::move(next);
  }
  return out;
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense output weights.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

}  // namespace

DenseSolution integrate_reference(const Rhs& rhs, const Vector& u0, double t0,
                                  double t1, double atol, double rtol) {
  if (!(t1 > t0)) throw std::invalid_argument("integrate_reference: need t1 > t0");
  if (!(atol >= 0.0) || !(rtol >= 0.0))
    throw std::invalid_argument("integrate_reference: tolerances must be nonnegative");
  const Eigen::Index n = u0.size();
  const double span = t1 - t0;
  const double hmin = 1e-14 * span;

  DenseSolution sol;
  sol.ts_.push_back(t0);
  Vector y = u0;
  Vector f1 = rhs(t0, y);

  // Initial step from the scaled derivative norm, refined by the controller.
  double h;
  {
    double d0 = 0.0, d1n = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = atol + rtol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1n = std::max(d1n, std::abs(f1[i]) / sc);
    }
    h = (d1n > 1e-30) ? 0.01 * d0 / d1n : 1e-6 * span;
    h = std::clamp(h, 1e-12 * span, 0.1 * span);
  }

  double t = t0;
  long rejected_in_a_row = 0;
  while (t < t1) {
    if (h < hmin)
      throw std::runtime_error(
          "integrate_reference: step size underflow at t = " + std::to_string(t) +
          " (problem too stiff for the requested tolerance)");
    if (t + h > t1) h = t1 - t;

    Vector k2 = rhs(t + c2 * h, y + h * (a21 * f1));
    Vector k3 = rhs(t + c3 * h, y + h * (a31 * f1 + a32 * k2));
    Vector k4 = rhs(t + c4 * h, y + h * (a41 * f1 + a42 * k2 + a43 * k3));
    Vector k5 = rhs(t + c5 * h, y + h * (a51 * f1 + a52 * k2 + a53 * k3 + a54 * k4));
    Vector k6 = rhs(t + h, y + h * (a61 * f1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vector ynew = y + h * (b1 * f1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Vector k7 = rhs(t + h, ynew);

    double err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ei = h * (e1 * f1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                             e6 * k6[i] + e7 * k7[i]);
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / static_cast<double>(n));
    if (!std::isfinite(err)) err = 2.0;  // force rejection and a smaller step

    if (err <= 1.0) {
      Vector ydiff = ynew - y;
      std::array<Vector, 5> rc;
      rc[0] = y;
      rc[1] = ydiff;
      rc[2] = h * f1 - ydiff;
      rc[3] = ydiff - h * k7 - rc[2];
      rc[4] = h * (d1 * f1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      sol.rcont_.push_back(std::move(rc));
      t += h;
      sol.ts_.push_back(t);
      y = std::move(ynew);
      f1 = std::move(k7);  // FSAL
      check_state(y, static_cast<long>(sol.rcont_.size()), t);
      rejected_in_a_row = 0;
      h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(err + 1e-300, -0.2)));
    } else {
      ++rejected_in_a_row;
      if (rejected_in_a_row > 200)
        throw std::runtime_error("integrate_reference: repeated step rejection at t = " +
                                 std::to_string(t));
      h *= std::max(0.1, 0.9 * std::pow(err, -0.2));
    }
  }
  return sol;
}

Vector DenseSolution::sample(double t) const {
  if (ts_.size() < 2) throw std::runtime_error("DenseSolution: empty solution");
  const double tol = 1e-9 * (ts_.back() - ts_.front());
  if (t < ts_.front() - tol || t > ts_.back() + tol)
    throw std::out_of_range("DenseSolution: t = " + std::to_string(t) +
                            " outside [" + std::to_string(ts_.front()) + ", " +
                            std::to_string(ts_.back()) + "]");
  t = std::clamp(t, ts_.front(), ts_.back());
  auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
  size_t k = static_cast<size_t>(std::distance(ts_.begin(), it));
  k = std::min(std::max<size_t>(k, 1), ts_.size() - 1) - 1;
  const double h = ts_[k + 1] - ts_[k];
  const double theta = (t - ts_[k]) / h;
  const auto& rc = rcont_[k];
  // Quartic interpolant in theta, exact at both interval ends.
  return rc[0] +
         theta * (rc[1] + (1.0 - theta) * (rc[2] + theta * (rc[3] + (1.0 - theta) * rc[4])));
}

Matrix DenseSolution::sample_grid(double dt, long K) const {
  if (!(dt > 0.0) || K < 0) throw std::invalid_argument("sample_grid: bad grid");
  Matrix out(K + 1, rcont_.front()[0].size());
  for (long k = 0; k <= K; ++k) out.row(k) = sample(ts_.front() + k * dt);
  return out;
}

double fe_stability_max_dt(const std::vector<std::complex<double>>& eigenvalues) {
  if (eigenvalues.empty())
    throw std::invalid_argument("fe_stability_max_dt: empty spectrum");
  bool all_real = true;
  double max_abs = 0.0;
  for (const auto& lam : eigenvalues) {
    if (!(lam.real() < 0.0))
      throw std::invalid_argument(
          "fe_stability_max_dt: spectrum has an eigenvalue with Re >= 0");
    if (lam.imag() != 0.0) all_real = false;
    max_abs = std::max(max_abs, std::abs(lam));
  }
  if (all_real) return 2.0 / max_abs;

  auto amplification = [&](double dt) {
    double m = 0.0;
    for (const auto& lam : eigenvalues) m = std::max(m, std::abs(1.0 + dt * lam));
    return m;
  };
  double lo = 0.0, hi = 2.0 / max_abs;
  while (amplification(hi) < 1.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e18) return hi;  // unreachable for a strictly stable spectrum
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (amplification(mid) < 1.0 ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace dre
