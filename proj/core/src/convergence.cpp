#include "dre/convergence.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dre/metrics.hpp"

namespace dre {
namespace {

// Least-squares slope of log2(e) against log2(dt) over rows [lo, hi).
double ls_slope(const std::vector<SweepRow>& rows, std::size_t lo,
                std::size_t hi) {
  const double n = static_cast<double>(hi - lo);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double x = std::log2(rows[i].dt);
    const double y = std::log2(rows[i].e_multi);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

SweepResult convergence_sweep(
    std::size_t n_samples,
    const std::function<Matrix(std::size_t sample, double dt, long K)>& solve,
    const std::function<Matrix(std::size_t sample,
                               const std::vector<double>& ts)>& reference,
    const SweepConfig& cfg) {
  if (n_samples == 0) throw std::invalid_argument("convergence_sweep: no samples");
  if (!(cfg.dt_base > 0.0)) throw std::invalid_argument("convergence_sweep: dt_base must be positive");
  if (cfg.s_min > cfg.s_max) throw std::invalid_argument("convergence_sweep: s_min > s_max");
  if (!(cfg.T > 0.0)) throw std::invalid_argument("convergence_sweep: T must be positive");

  const double dt_max = cfg.dt_base * std::ldexp(1.0, cfg.s_max);
  const long n_eval = static_cast<long>(std::floor(cfg.T / dt_max + 1e-9));
  if (n_eval < 1) {
    throw std::invalid_argument(
        "convergence_sweep: horizon shorter than the largest step");
  }

  SweepResult result;
  result.eval_times.resize(static_cast<std::size_t>(n_eval) + 1);
  for (long j = 0; j <= n_eval; ++j) {
    result.eval_times[static_cast<std::size_t>(j)] = dt_max * static_cast<double>(j);
  }

  std::vector<Matrix> refs(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    refs[i] = reference(i, result.eval_times);
    if (refs[i].rows() != n_eval + 1) {
      throw std::runtime_error("convergence_sweep: reference has wrong row count");
    }
  }

  for (int s = cfg.s_min; s <= cfg.s_max; ++s) {
    const long stride = 1L << (cfg.s_max - s);
    const double dt = dt_max / static_cast<double>(stride);
    const long K = n_eval * stride;

    SweepRow row;
    row.dt = dt;
    row.steps = K;

    std::vector<Matrix> recs(n_samples);
    try {
      for (std::size_t i = 0; i < n_samples; ++i) {
        const Matrix full = solve(i, dt, K);
        if (full.rows() != K + 1) {
          throw std::runtime_error("convergence_sweep: solver returned wrong row count");
        }
        Matrix on_grid(n_eval + 1, full.cols());
        for (long j = 0; j <= n_eval; ++j) on_grid.row(j) = full.row(j * stride);
        recs[i] = std::move(on_grid);
      }
      row.e_multi = error_multi(refs, recs);
      if (!std::isfinite(row.e_multi)) row.diverged = true;
    } catch (const DivergenceError&) {
      row.diverged = true;
    }
    if (row.diverged) row.e_multi = std::numeric_limits<double>::infinity();
    result.rows.push_back(row);
  }

  // Slope fit over the pre-plateau suffix of the stable rows.
  std::size_t valid_end = 0;  // first diverged row (stable rows are a prefix in dt)
  while (valid_end < result.rows.size() && !result.rows[valid_end].diverged) {
    ++valid_end;
  }
  if (valid_end >= 2) {
    const double p = static_cast<double>(cfg.expected_order);
    std::size_t lo = valid_end - 1;  // grow the window toward smaller dt
    while (lo > 0) {
      const double local = std::log2(result.rows[lo].e_multi /
                                     result.rows[lo - 1].e_multi);
      if (std::abs(local - p) > 0.25 * p) break;
      --lo;
    }
    if (lo == valid_end - 1) lo = 0;  // no qualifying ratio: fit everything stable
    result.fit_points = static_cast<int>(valid_end - lo);
    result.fitted_slope = ls_slope(result.rows, lo, valid_end);
  }
  return result;
}

double global_error_bound(const GlobalErrorInputs& in, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("global_error_bound: dt must be positive");
  const double network = in.L_psi * (in.eps_psi_prime + in.eps_fn * in.T) *
                         std::exp(in.L_fn * in.T);
  const double scheme = in.L_psi * in.C1 * std::pow(dt, in.order);
  return network + scheme + in.eps_psi;
}

}  // namespace dre
