#include "fall/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fall {

Instance random_instance(std::mt19937_64& rng, const InstanceShape& shape) {
  std::uniform_int_distribution<Index> pick_d(1, shape.max_d);
  std::uniform_int_distribution<Index> pick_m(1, shape.max_m);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  constexpr double lambdas[] = {0.01, 1.0, 100.0};
  std::uniform_int_distribution<int> pick_lambda(0, 2);

  Instance inst;
  const Index d = pick_d(rng);
  const Index m = pick_m(rng);
  const bool bias = coin(rng);
  const Index dp = d + (bias ? 1 : 0);
  const Index k_max = shape.generic_anchors ? std::min(shape.max_k, dp * m) : shape.max_k;
  const Index k = std::uniform_int_distribution<Index>(1, k_max)(rng);
  inst.lambda = lambdas[pick_lambda(rng)];

  auto normal_matrix = [&](Index r, Index c) {
    Matrix M(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) M(i, j) = gauss(rng);
    return M;
  };
  inst.x = normal_matrix(d, 1).col(0);
  inst.y = normal_matrix(m, 1).col(0);
  inst.anchors.with_bias = bias;
  for (Index l = 0; l < k; ++l) {
    inst.anchors.models.push_back(normal_matrix(dp, m));
    inst.anchors.points.push_back(Vector::Zero(d));
    inst.anchors.neighbor_sets.push_back({0});
  }
  return inst;
}

std::string VerifySummary::describe() const {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific;
  os << "instances:                 " << instances << '\n'
     << "vertex optimality:         " << (vertex_failures == 0 ? "ok" : "FAILED")
     << "  worst relative violation " << worst_vertex_violation << "  failures " << vertex_failures << '\n'
     << "quadratic form consistency: " << (qp_failures == 0 ? "ok" : "FAILED")
     << "  worst relative error " << worst_qp_error << "  failures " << qp_failures << '\n'
     << "H symmetry:                " << "worst relative asymmetry " << worst_symmetry_error << '\n'
     << "H negative definite:       " << (eigen_failures == 0 ? "ok" : "FAILED")
     << "  max eig/||H|| " << max_eigenvalue_ratio << "  failures " << eigen_failures << '\n';
  return os.str();
}

VerifySummary run_verification(const VerifyConfig& config) {
  if (config.instances < 1) throw std::invalid_argument("instances must be >= 1");
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");

  std::mt19937_64 rng(config.seed);
  VerifySummary s;
  s.instances = config.instances;
  s.worst_vertex_violation = -std::numeric_limits<double>::infinity();
  s.max_eigenvalue_ratio = -std::numeric_limits<double>::infinity();

  InstanceShape generic = config.shape;
  generic.generic_anchors = true;

  for (Index t = 0; t < config.instances; ++t) {
    const Instance inst = random_instance(rng, config.shape);
    const QpForm qp = build_qp(inst.x, inst.y, inst.anchors, inst.lambda);

    const double h_norm = qp.H.norm();
    if (h_norm > 0.0) {
      s.worst_symmetry_error = std::max(s.worst_symmetry_error, (qp.H - qp.H.transpose()).norm() / h_norm);
    }

    for (Index j = 0; j < config.qp_points; ++j) {
      const Vector p = sample_simplex(inst.anchors.size(), rng);
      const Matrix W = fixed_weight_optimum(inst.x, inst.y, p, inst.anchors, inst.lambda);
      const double direct = objective(inst.x, inst.y, W, p, inst.anchors, inst.lambda);
      const double rel = std::abs(qp.evaluate(p) - direct) /
                         std::max(std::abs(direct), std::numeric_limits<double>::min());
      s.worst_qp_error = std::max(s.worst_qp_error, rel);
      if (rel > config.qp_tolerance) ++s.qp_failures;
    }

    const VertexReport vr =
        verify_vertex_optimality(inst.x, inst.y, inst.anchors, inst.lambda, config.trials, rng());
    s.worst_vertex_violation = std::max(s.worst_vertex_violation, vr.worst_violation);
    if (!vr.optimal(config.tolerance)) ++s.vertex_failures;

    const Instance gen = random_instance(rng, generic);
    const QpForm gqp = build_qp(gen.x, gen.y, gen.anchors, gen.lambda);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(gqp.H, Eigen::EigenvaluesOnly);
    const double spectral = eig.eigenvalues().cwiseAbs().maxCoeff();
    const double ratio = eig.eigenvalues().maxCoeff() / spectral;
    s.max_eigenvalue_ratio = std::max(s.max_eigenvalue_ratio, ratio);
    if (!(ratio < -1e-12)) ++s.eigen_failures;
  }
  return s;
}

}  // namespace fall
