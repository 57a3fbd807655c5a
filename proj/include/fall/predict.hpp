#pragma once

#include "fall/core.hpp"
#include "fall/types.hpp"

namespace fall {

struct PredictConfig {
  Index neighbors = 20;               // K_pred
  double exact_match_epsilon = 1e-12;
};

struct NeighborWeights {
  IndexList indices;
  Vector weights;  // simplex vector aligned with indices
};

/// Inverse-distance weights over the K nearest training rows. When some
/// neighbors lie within `exact_match_epsilon`, the weight is split uniformly
/// over those exact matches only.
NeighborWeights neighbor_weights(const Eigen::Ref<const Vector>& x, const Matrix& train_X,
                                 Index neighbors, double exact_match_epsilon = 1e-12);

/// W_pred = C_pred + R_pred with both sums kept separate.
struct ModelMixture {
  Matrix correction;  // sum_j alpha_j C_{h_j}
  Matrix anchor;      // sum_j alpha_j A_{l_{h_j}}

  Matrix combined() const { return correction + anchor; }
};

ModelMixture mix_models(const FallModel& model, const NeighborWeights& weights);

Vector predict(const FallModel& model, const Eigen::Ref<const Vector>& x,
               const PredictConfig& config = {});

/// Row-wise predict; output row r belongs to input row r.
Matrix predict_batch(const FallModel& model, const Matrix& X, const PredictConfig& config = {},
                     int threads = 1);

struct ClassPrediction {
  Index label = 0;  // argmax of scores, ties to the lower index
  Vector scores;    // raw regression output, not clipped or renormalized
};

ClassPrediction predict_class(const FallModel& model, const Eigen::Ref<const Vector>& x,
                              const PredictConfig& config = {});

/// Argmax with ties resolved to the lowest index.
Index argmax_label(const Eigen::Ref<const Vector>& scores);

}  // namespace fall
