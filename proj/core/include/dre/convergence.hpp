#pragma once

#include <functional>
#include <vector>

#include "dre/common.hpp"

namespace dre {

/// Step-size sweep dt = dt_base * 2^s, s in [s_min, s_max]. Every run is
/// evaluated on the fixed grid of the largest step (all smaller steps divide
/// it exactly); the aggregate error sums over time without averaging, so a
/// shared grid is the only way the sweep exposes the scheme's order.
struct SweepConfig {
  double dt_base = 0.0;
  int s_min = -4;
  int s_max = 3;
  double T = 0.0;  // horizon, truncated down to a multiple of the largest dt
  int expected_order = 1;
};

struct SweepRow {
  double dt = 0.0;
  long steps = 0;
  double e_multi = 0.0;
  bool diverged = false;  // at least one sample left the trusted region
};

struct SweepResult {
  std::vector<SweepRow> rows;      // ascending dt
  std::vector<double> eval_times;  // shared evaluation grid (multiples of max dt)
  double fitted_slope = 0.0;
  int fit_points = 0;  // rows entering the slope fit
};

/// solve(sample, dt, K) integrates test sample `sample` with K steps of size
/// dt and returns the reconstructed full-state trajectory (K+1 rows). It may
/// throw DivergenceError; the row is then marked diverged and skipped.
/// reference(sample, ts) returns the exact trajectory at the given times.
///
/// The slope fit takes the longest run of consecutive rows ending at the
/// largest stable dt whose local log2 error ratios stay within 25% of
/// expected_order (the pre-plateau regime) and least-squares fits
/// log2(e_multi) against log2(dt) over it; if no local ratio qualifies, the
/// fit covers all stable rows.
SweepResult convergence_sweep(
    std::size_t n_samples,
    const std::function<Matrix(std::size_t sample, double dt, long K)>& solve,
    const std::function<Matrix(std::size_t sample,
                               const std::vector<double>& ts)>& reference,
    const SweepConfig& cfg);

/// A-priori bound on the reconstructed solution error at time T for a reduced
/// model with network sup errors eps_* integrated by an order-P scheme:
///   L_psi (eps_psi_prime + eps_fn T) e^{L_fn T} + L_psi C1 dt^P + eps_psi.
struct GlobalErrorInputs {
  double L_psi = 1.0;
  double L_fn = 1.0;
  double T = 1.0;
  double eps_psi = 0.0;        // decoder error
  double eps_psi_prime = 0.0;  // encoder error
  double eps_fn = 0.0;         // reduced-rhs error
  double C1 = 1.0;             // scheme constant
  int order = 1;
};
double global_error_bound(const GlobalErrorInputs& in, double dt);

}  // namespace dre
