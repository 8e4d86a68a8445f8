#include "dre/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dre {
namespace {

void check_shapes(const std::vector<Matrix>& ref,
                  const std::vector<Matrix>& rec, const char* who) {
  if (ref.empty() || ref.size() != rec.size()) {
    throw std::invalid_argument(std::string(who) +
                                ": need equally many non-empty trajectory sets");
  }
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (ref[i].rows() != rec[i].rows() || ref[i].cols() != rec[i].cols() ||
        ref[i].rows() != ref[0].rows() || ref[i].cols() != ref[0].cols()) {
      throw std::invalid_argument(std::string(who) +
                                  ": trajectory shapes do not match");
    }
  }
  if (ref[0].rows() == 0) {
    throw std::invalid_argument(std::string(who) + ": empty trajectories");
  }
}

}  // namespace

namespace {

void warn_excluded(const char* who, long count) {
  if (count > 0) {
    std::fprintf(stderr,
                 "warning: %s excluded %ld zero-norm reference snapshots\n",
                 who, count);
  }
}

}  // namespace

double error_multi(const std::vector<Matrix>& ref,
                   const std::vector<Matrix>& rec) {
  check_shapes(ref, rec, "error_multi");
  double total = 0.0;
  long excluded = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (Eigen::Index j = 0; j < ref[i].rows(); ++j) {
      const double den = ref[i].row(j).squaredNorm();
      if (den == 0.0) {
        ++excluded;
        continue;
      }
      total += (ref[i].row(j) - rec[i].row(j)).squaredNorm() / den;
    }
  }
  warn_excluded("error_multi", excluded);
  return std::sqrt(total / static_cast<double>(ref.size()));
}

Vector error_ave_rel(const std::vector<Matrix>& ref,
                     const std::vector<Matrix>& rec) {
  check_shapes(ref, rec, "error_ave_rel");
  Vector out = Vector::Zero(ref[0].rows());
  long excluded = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (Eigen::Index j = 0; j < ref[i].rows(); ++j) {
      const double den = ref[i].row(j).norm();
      if (den == 0.0) {
        ++excluded;
        continue;
      }
      out[j] += (ref[i].row(j) - rec[i].row(j)).norm() / den;
    }
  }
  warn_excluded("error_ave_rel", excluded);
  return out / static_cast<double>(ref.size());
}

Vector error_ave_con(const std::vector<Matrix>& ref,
                     const std::vector<Matrix>& rec) {
  check_shapes(ref, rec, "error_ave_con");
  Vector out = Vector::Zero(ref[0].rows());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (Eigen::Index j = 0; j < ref[i].rows(); ++j) {
      out[j] += (ref[i].row(j) - rec[i].row(j)).sum();
    }
  }
  return out / static_cast<double>(ref.size());
}

}  // namespace dre
