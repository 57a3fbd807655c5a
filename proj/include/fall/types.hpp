#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace fall {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

/// Appends the constant 1 feature when `with_bias` is set.
inline Vector augment(const Eigen::Ref<const Vector>& x, bool with_bias) {
  if (!with_bias) return x;
  Vector out(x.size() + 1);
  out.head(x.size()) = x;
  out(x.size()) = 1.0;
  return out;
}

}  // namespace fall
