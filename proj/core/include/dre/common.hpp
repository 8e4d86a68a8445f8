#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dre {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Network weights are stored flat in row-major order, so expose a row-major map type.
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Thrown when a forward/backward pass produces a non-finite value.
/// `layer` is the 0-based index of the layer whose output went bad.
class NumericError : public std::runtime_error {
 public:
  NumericError(int layer, const std::string& what)
      : std::runtime_error(what), layer(layer) {}
  int layer;
};

/// Thrown when an integration step leaves the trusted region
/// (non-finite state or max-norm above the divergence threshold).
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long step, double t, const std::string& what)
      : std::runtime_error(what), step(step), t(t) {}
  long step;
  double t;
};

/// splitmix64; used to derive independent per-purpose seeds from one master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace detail {
template <typename T>
T tree_sum_range(const std::vector<T>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return v[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return tree_sum_range(v, lo, mid) + tree_sum_range(v, mid, hi);
}
}  // namespace detail

/// Pairwise (balanced-tree) summation in index order. The result depends only
/// on the element order, never on how the elements were produced, so batch
/// reductions stay bit-identical across thread counts.
template <typename T>
T tree_sum(const std::vector<T>& v) {
  if (v.empty()) throw std::invalid_argument("tree_sum: empty input");
  return detail::tree_sum_range(v, 0, v.size());
}

}  // namespace dre
