#pragma once

#include "fall/dataset.hpp"
#include "fall/types.hpp"

#include <string_view>

namespace fall {

/// Global linear model y = W^T x~ fitted by ridge regression.
struct RidgeModel {
  Matrix W;  // d' x m
  double alpha = 1.0;
  bool with_bias = true;

  Vector predict(const Eigen::Ref<const Vector>& x) const;
  Matrix predict_batch(const Matrix& X) const;
};

RidgeModel ridge_fit(const Dataset& data, double alpha, bool with_bias);

enum class KnnWeighting { uniform, inverse_distance };

KnnWeighting parse_knn_weighting(std::string_view name);
std::string_view to_string(KnnWeighting weighting);

struct KnnModel {
  Matrix train_X;
  Matrix train_Y;
  Index neighbors = 5;
  KnnWeighting weighting = KnnWeighting::uniform;
  double exact_match_epsilon = 1e-12;
};

KnnModel knn_fit(const Dataset& data, Index neighbors, KnnWeighting weighting);

Vector knn_predict(const KnnModel& model, const Eigen::Ref<const Vector>& x);
Matrix knn_predict_batch(const KnnModel& model, const Matrix& X);

}  // namespace fall
