#include "fall/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fall {

std::vector<Neighbor> nearest_rows(const Matrix& points, const Eigen::Ref<const Vector>& query,
                                   Index count) {
  const Index n = points.rows();
  if (count < 1 || count > n) {
    throw std::invalid_argument("neighbor count " + std::to_string(count) +
                                " outside [1, " + std::to_string(n) + "]");
  }
  if (query.size() != points.cols()) {
    throw std::invalid_argument("query has " + std::to_string(query.size()) +
                                " entries, expected " + std::to_string(points.cols()));
  }

  std::vector<std::pair<double, Index>> keyed(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    keyed[static_cast<std::size_t>(i)] = {(points.row(i).transpose() - query).squaredNorm(), i};
  }
  // pair ordering compares distance first, then row index
  std::partial_sort(keyed.begin(), keyed.begin() + count, keyed.end());

  std::vector<Neighbor> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index j = 0; j < count; ++j) {
    const auto& [sq, row] = keyed[static_cast<std::size_t>(j)];
    out.push_back({row, std::sqrt(sq)});
  }
  return out;
}

}  // namespace fall
