#include "fall/baselines.hpp"

#include "fall/anchors.hpp"
#include "fall/predict.hpp"

#include <numeric>
#include <string>

namespace fall {

RidgeModel ridge_fit(const Dataset& data, double alpha, bool with_bias) {
  IndexList all(static_cast<std::size_t>(data.rows()));
  std::iota(all.begin(), all.end(), Index{0});
  return RidgeModel{fit_ridge_rows(data.X, data.Y, all, alpha, with_bias), alpha, with_bias};
}

Vector RidgeModel::predict(const Eigen::Ref<const Vector>& x) const {
  return W.transpose() * augment(x, with_bias);
}

Matrix RidgeModel::predict_batch(const Matrix& X) const {
  const Index d = W.rows() - (with_bias ? 1 : 0);
  if (X.cols() != d) throw std::invalid_argument("ridge input has wrong column count");
  Matrix out = X * W.topRows(d);
  if (with_bias) out.rowwise() += W.row(d);
  return out;
}

KnnWeighting parse_knn_weighting(std::string_view name) {
  if (name == "uniform") return KnnWeighting::uniform;
  if (name == "inverse_distance" || name == "distance") return KnnWeighting::inverse_distance;
  throw std::invalid_argument("unknown KNN weighting '" + std::string(name) + "'");
}

std::string_view to_string(KnnWeighting weighting) {
  return weighting == KnnWeighting::uniform ? "uniform" : "inverse_distance";
}

KnnModel knn_fit(const Dataset& data, Index neighbors, KnnWeighting weighting) {
  if (neighbors < 1 || neighbors > data.rows()) {
    throw std::invalid_argument("KNN neighbors " + std::to_string(neighbors) + " outside [1, " +
                                std::to_string(data.rows()) + "]");
  }
  return KnnModel{data.X, data.Y, neighbors, weighting};
}

Vector knn_predict(const KnnModel& model, const Eigen::Ref<const Vector>& x) {
  const NeighborWeights w =
      neighbor_weights(x, model.train_X, model.neighbors, model.exact_match_epsilon);
  Vector out = Vector::Zero(model.train_Y.cols());
  const double uniform = 1.0 / static_cast<double>(w.indices.size());
  for (std::size_t j = 0; j < w.indices.size(); ++j) {
    const double a = model.weighting == KnnWeighting::uniform ? uniform : w.weights(static_cast<Index>(j));
    out += a * model.train_Y.row(w.indices[j]).transpose();
  }
  return out;
}

Matrix knn_predict_batch(const KnnModel& model, const Matrix& X) {
  if (X.cols() != model.train_X.cols()) throw std::invalid_argument("KNN input has wrong column count");
  Matrix out(X.rows(), model.train_Y.cols());
  for (Index r = 0; r < X.rows(); ++r) out.row(r) = knn_predict(model, X.row(r).transpose()).transpose();
  return out;
}

}  // namespace fall
