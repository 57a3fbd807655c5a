#pragma once

#include "fall/types.hpp"

namespace fall {

struct Neighbor {
  Index row;
  double distance;
};

/// The `count` rows of `points` closest to `query` in Euclidean distance,
/// nearest first. Equal distances are ordered by lower row index.
std::vector<Neighbor> nearest_rows(const Matrix& points,
                                   const Eigen::Ref<const Vector>& query,
                                   Index count);

}  // namespace fall
