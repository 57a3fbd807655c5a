#include "fall/predict.hpp"

#include "fall/neighbors.hpp"
#include "fall/parallel.hpp"

#include <string>

namespace fall {

NeighborWeights neighbor_weights(const Eigen::Ref<const Vector>& x, const Matrix& train_X,
                                 Index neighbors, double exact_match_epsilon) {
  const auto nearest = nearest_rows(train_X, x, neighbors);

  NeighborWeights out;
  out.weights.resize(neighbors);
  Index exact = 0;
  for (const auto& nb : nearest) {
    out.indices.push_back(nb.row);
    if (nb.distance <= exact_match_epsilon) ++exact;
  }

  for (Index j = 0; j < neighbors; ++j) {
    const double dist = nearest[static_cast<std::size_t>(j)].distance;
    if (exact > 0) {
      out.weights(j) = dist <= exact_match_epsilon ? 1.0 : 0.0;
    } else {
      out.weights(j) = 1.0 / dist;
    }
  }
  out.weights /= out.weights.sum();
  return out;
}

ModelMixture mix_models(const FallModel& model, const NeighborWeights& weights) {
  ModelMixture mix;
  mix.correction = Matrix::Zero(model.anchors.model_rows(), model.output_dim());
  mix.anchor = Matrix::Zero(model.anchors.model_rows(), model.output_dim());
  for (std::size_t j = 0; j < weights.indices.size(); ++j) {
    const double w = weights.weights(static_cast<Index>(j));
    const LocalModel& local = model.locals.at(static_cast<std::size_t>(weights.indices[j]));
    mix.correction += w * local.correction;
    mix.anchor += w * model.anchors.models[static_cast<std::size_t>(local.anchor)];
  }
  return mix;
}

Vector predict(const FallModel& model, const Eigen::Ref<const Vector>& x,
               const PredictConfig& config) {
  if (model.size() == 0) throw std::invalid_argument("model has no local models");
  if (x.size() != model.input_dim()) {
    throw std::invalid_argument("input has " + std::to_string(x.size()) + " entries, model expects " +
                                std::to_string(model.input_dim()));
  }
  const NeighborWeights w =
      neighbor_weights(x, model.train_X, config.neighbors, config.exact_match_epsilon);
  const Matrix W_pred = mix_models(model, w).combined();
  return W_pred.transpose() * augment(x, model.with_bias);
}

Matrix predict_batch(const FallModel& model, const Matrix& X, const PredictConfig& config,
                     int threads) {
  if (X.cols() != model.input_dim()) {
    throw std::invalid_argument("input has " + std::to_string(X.cols()) +
                                " columns, model expects " + std::to_string(model.input_dim()));
  }
  Matrix out(X.rows(), model.output_dim());
  parallel_for(X.rows(), threads, [&](Index r) {
    out.row(r) = predict(model, X.row(r).transpose(), config).transpose();
  });
  return out;
}

Index argmax_label(const Eigen::Ref<const Vector>& scores) {
  Index best = 0;
  for (Index c = 1; c < scores.size(); ++c) {
    if (scores(c) > scores(best)) best = c;
  }
  return best;
}

ClassPrediction predict_class(const FallModel& model, const Eigen::Ref<const Vector>& x,
                              const PredictConfig& config) {
  ClassPrediction out;
  out.scores = predict(model, x, config);
  out.label = argmax_label(out.scores);
  return out;
}

}  // namespace fall
