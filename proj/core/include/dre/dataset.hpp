#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dre/problems.hpp"

namespace dre {

struct SplitCounts {
  int n_train = 0, n_val = 0, n_test = 0;
  int total() const { return n_train + n_val + n_test; }
};

/// Reference trajectories on a uniform grid, with parameters and an explicit
/// train/val/test split. When has_rhs is set, every sample stores F_N at each
/// snapshot (all-or-none).
struct TrajectoryDataset {
  std::string problem_name;
  std::uint64_t seed = 0;
  double dt = 0.0;  // snapshot spacing
  double T = 0.0;
  int n_time = 0;   // snapshots per trajectory including t = 0
  bool has_rhs = false;
  std::vector<Vector> mus;
  std::vector<Matrix> states;      // each n_time x N
  std::vector<Matrix> rhs_values;  // each n_time x N when has_rhs
  std::vector<int> train_idx, val_idx, test_idx;

  int dim() const { return states.empty() ? 0 : static_cast<int>(states[0].cols()); }
  int n_samples() const { return static_cast<int>(states.size()); }
  double time_at(int j) const { return dt * j; }
  void validate() const;

  /// Rows of all training snapshots stacked (for normalization fitting).
  Matrix train_snapshots() const;
};

/// Draws mu uniformly in the problem's box, integrates each sample with the
/// adaptive reference integrator and samples a uniform grid of n_time
/// snapshots on [0, T]. Samples are assigned to train/val/test in draw order.
/// Val and test must each hold at least 10% of the total unless
/// allow_small_splits is set (some published setups size them from the
/// training count instead; callers opting in get a warning on stderr).
/// A sample whose reference solve fails aborts with mu in the message.
TrajectoryDataset generate_dataset(const OdeProblem& problem, SplitCounts split,
                                   int n_time, double T, bool store_rhs,
                                   std::uint64_t seed, double atol = 1e-16,
                                   double rtol = 1e-12,
                                   bool allow_small_splits = false);

/// Directory layout: manifest.json plus traj_<i>.csv per sample with columns
/// t, u_1..u_N and, when rhs is stored, f_1..f_N; 17 significant digits.
void save_dataset(const TrajectoryDataset& data, const std::string& dir);
TrajectoryDataset load_dataset(const std::string& dir);

}  // namespace dre
