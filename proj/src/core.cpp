#include "fall/core.hpp"

#include "fall/parallel.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace fall {

namespace {

void check_shapes(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                  const AnchorSet& anchors) {
  if (anchors.size() < 1) throw std::invalid_argument("anchor set is empty");
  if (x.size() != anchors.input_dim()) {
    throw std::invalid_argument("input has " + std::to_string(x.size()) + " entries, anchors expect " +
                                std::to_string(anchors.input_dim()));
  }
  if (y.size() != anchors.output_dim()) {
    throw std::invalid_argument("target has " + std::to_string(y.size()) +
                                " entries, anchors expect " + std::to_string(anchors.output_dim()));
  }
}

Matrix anchor_mixture(const Eigen::Ref<const Vector>& p, const AnchorSet& anchors) {
  Matrix G = Matrix::Zero(anchors.model_rows(), anchors.output_dim());
  for (Index l = 0; l < anchors.size(); ++l) G += p(l) * anchors.models[static_cast<std::size_t>(l)];
  return G;
}

}  // namespace

Matrix FallModel::full_model(Index i) const {
  const LocalModel& local = locals.at(static_cast<std::size_t>(i));
  return local.correction + anchors.models.at(static_cast<std::size_t>(local.anchor));
}

void FallModel::validate() const {
  anchors.validate();
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (with_bias != anchors.with_bias) throw std::invalid_argument("bias flag differs from anchor set");
  if (static_cast<Index>(locals.size()) != train_X.rows()) {
    throw std::invalid_argument("local model count differs from training rows");
  }
  if (train_X.cols() != anchors.input_dim()) throw std::invalid_argument("training inputs have wrong width");
  for (const auto& local : locals) {
    if (local.anchor < 0 || local.anchor >= anchors.size()) {
      throw std::invalid_argument("local model refers to a missing anchor");
    }
    if (local.correction.rows() != anchors.model_rows() ||
        local.correction.cols() != anchors.output_dim()) {
      throw std::invalid_argument("correction matrix has wrong shape");
    }
  }
}

double QpForm::evaluate(const Eigen::Ref<const Vector>& p) const {
  return p.dot(H * p) + b.dot(p) + constant;
}

Assignment assign_anchor(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                         const AnchorSet& anchors) {
  check_shapes(x, y, anchors);
  const Vector xa = augment(x, anchors.with_bias);
  Assignment best{0, std::numeric_limits<double>::infinity()};
  for (Index l = 0; l < anchors.size(); ++l) {
    const double r = (y - anchors.models[static_cast<std::size_t>(l)].transpose() * xa).norm();
    if (r < best.residual_norm) best = {l, r};
  }
  return best;
}

LocalModel fit_local_model(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                           const AnchorSet& anchors, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  const Assignment a = assign_anchor(x, y, anchors);
  const Vector xa = augment(x, anchors.with_bias);
  const double denom = lambda + xa.squaredNorm();
  const Vector residual = y - anchors.models[static_cast<std::size_t>(a.anchor)].transpose() * xa;

  LocalModel local;
  local.anchor = a.anchor;
  local.beta = lambda / denom;
  local.correction = xa * residual.transpose() / denom;
  local.residual_norm = a.residual_norm;
  return local;
}

FallModel fit(const Dataset& data, const AnchorSet& anchors, double lambda, int threads) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (data.rows() < 1) throw std::invalid_argument("cannot fit on an empty dataset");
  if (data.features() != anchors.input_dim() || data.targets() != anchors.output_dim()) {
    throw std::invalid_argument("dataset is " + std::to_string(data.features()) + " -> " +
                                std::to_string(data.targets()) + " but anchors are " +
                                std::to_string(anchors.input_dim()) + " -> " +
                                std::to_string(anchors.output_dim()));
  }

  FallModel model;
  model.anchors = anchors;
  model.lambda = lambda;
  model.with_bias = anchors.with_bias;
  model.train_X = data.X;
  model.locals.resize(static_cast<std::size_t>(data.rows()));
  parallel_for(data.rows(), threads, [&](Index i) {
    model.locals[static_cast<std::size_t>(i)] =
        fit_local_model(data.X.row(i).transpose(), data.Y.row(i).transpose(), anchors, lambda);
  });
  return model;
}

void check_simplex(const Eigen::Ref<const Vector>& p, double tolerance) {
  if (p.size() < 1) throw std::invalid_argument("simplex vector is empty");
  if ((p.array() < -tolerance).any() || std::abs(p.sum() - 1.0) > tolerance || !p.allFinite()) {
    throw std::invalid_argument("p is not in the probability simplex");
  }
}

double objective(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                 const Matrix& W, const Eigen::Ref<const Vector>& p, const AnchorSet& anchors,
                 double lambda) {
  check_shapes(x, y, anchors);
  check_simplex(p);
  if (p.size() != anchors.size()) throw std::invalid_argument("p length differs from anchor count");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  const Vector xa = augment(x, anchors.with_bias);
  double reg = 0.0;
  for (Index l = 0; l < anchors.size(); ++l) {
    reg += p(l) * (W - anchors.models[static_cast<std::size_t>(l)]).squaredNorm();
  }
  return (y - W.transpose() * xa).squaredNorm() + lambda * reg;
}

Matrix objective_gradient(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                          const Matrix& W, const Eigen::Ref<const Vector>& p,
                          const AnchorSet& anchors, double lambda) {
  check_shapes(x, y, anchors);
  const Vector xa = augment(x, anchors.with_bias);
  const Matrix G = anchor_mixture(p, anchors);
  // sum_l p_l (W - A_l) = W - G because p sums to one
  return 2.0 * xa * (xa.transpose() * W - y.transpose()) + 2.0 * lambda * (W - G);
}

Matrix fixed_weight_optimum(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                            const Eigen::Ref<const Vector>& p, const AnchorSet& anchors,
                            double lambda) {
  check_shapes(x, y, anchors);
  check_simplex(p);
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  const Vector xa = augment(x, anchors.with_bias);
  const Matrix G = anchor_mixture(p, anchors);
  const Vector residual = y - G.transpose() * xa;
  return xa * residual.transpose() / (lambda + xa.squaredNorm()) + G;
}

QpForm build_qp(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                const AnchorSet& anchors, double lambda) {
  check_shapes(x, y, anchors);
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  const Vector xa = augment(x, anchors.with_bias);
  const double beta = lambda / (lambda + xa.squaredNorm());
  const Index k = anchors.size();

  // column l holds the anchor prediction A_l^T x~
  Matrix preds(anchors.output_dim(), k);
  for (Index l = 0; l < k; ++l) preds.col(l) = anchors.models[static_cast<std::size_t>(l)].transpose() * xa;

  QpForm qp;
  qp.H.resize(k, k);
  qp.b.resize(k);
  for (Index l = 0; l < k; ++l) {
    const Matrix& Al = anchors.models[static_cast<std::size_t>(l)];
    for (Index j = l; j < k; ++j) {
      const Matrix& Aj = anchors.models[static_cast<std::size_t>(j)];
      // tr(A_l^T A_j) is the Frobenius inner product
      const double h = beta * preds.col(l).dot(preds.col(j)) - lambda * Al.cwiseProduct(Aj).sum();
      qp.H(l, j) = h;
      qp.H(j, l) = h;
    }
    qp.b(l) = -2.0 * beta * y.dot(preds.col(l)) + lambda * Al.squaredNorm();
  }
  qp.constant = beta * y.squaredNorm();
  return qp;
}

Vector sample_simplex(Index k, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  Vector p(k);
  for (Index l = 0; l < k; ++l) p(l) = expo(rng);
  return p / p.sum();
}

VertexReport verify_vertex_optimality(const Eigen::Ref<const Vector>& x,
                                      const Eigen::Ref<const Vector>& y, const AnchorSet& anchors,
                                      double lambda, Index trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const Index k = anchors.size();
  const Assignment a = assign_anchor(x, y, anchors);

  auto value_at = [&](const Vector& p) {
    return objective(x, y, fixed_weight_optimum(x, y, p, anchors, lambda), p, anchors, lambda);
  };

  VertexReport report;
  report.chosen = a.anchor;
  report.interior_trials = trials;
  report.vertex_values.resize(static_cast<std::size_t>(k));
  for (Index l = 0; l < k; ++l) {
    report.vertex_values[static_cast<std::size_t>(l)] = value_at(Vector::Unit(k, l));
  }
  report.chosen_value = report.vertex_values[static_cast<std::size_t>(a.anchor)];

  double worst = -std::numeric_limits<double>::infinity();
  auto record = [&](double candidate) {
    const double scale = std::max({std::abs(report.chosen_value), std::abs(candidate),
                                   std::numeric_limits<double>::min()});
    worst = std::max(worst, (report.chosen_value - candidate) / scale);
  };
  for (const double v : report.vertex_values) record(v);

  std::mt19937_64 rng(seed);
  for (Index t = 0; t < trials; ++t) record(value_at(sample_simplex(k, rng)));
  report.worst_violation = worst;
  return report;
}

}  // namespace fall
