#pragma once

#include <vector>

#include "dre/common.hpp"

namespace dre {

/// Aggregate relative error over a set of trajectories (rows = snapshots):
///   sqrt( (1/n_test) sum_i sum_j ||u_ij - v_ij||^2 / ||u_ij||^2 ).
/// The sum over time is NOT averaged, so values on grids with different
/// snapshot counts are not comparable; convergence studies must evaluate
/// every run on one fixed grid. Reference snapshots with norm zero are
/// excluded (with a warning on stderr).
double error_multi(const std::vector<Matrix>& ref,
                   const std::vector<Matrix>& rec);

/// Per-snapshot relative error curve,
///   e(j) = (1/n_test) sum_i ||u_ij - v_ij|| / ||u_ij||.
Vector error_ave_rel(const std::vector<Matrix>& ref,
                     const std::vector<Matrix>& rec);

/// Signed conservation defect curve,
///   e(j) = (1/n_test) sum_i sum_k (u_ijk - v_ijk);
/// zero whenever the reconstruction preserves the total of a conserved
/// quantity that the reference preserves.
Vector error_ave_con(const std::vector<Matrix>& ref,
                     const std::vector<Matrix>& rec);

}  // namespace dre
