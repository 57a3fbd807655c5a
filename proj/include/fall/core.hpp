#pragma once

#include "fall/anchors.hpp"
#include "fall/dataset.hpp"
#include "fall/types.hpp"

#include <cstdint>
#include <random>

namespace fall {

// Per-sample problem
//
//   J(W, p) = ||y - W^T x~||^2 + lambda * sum_l p_l ||W - A_l||_F^2,  p in the simplex.
//
// For a fixed p the minimizer over W is
//   W(p) = x~ (y - G^T x~)^T / (lambda + x~^T x~) + G,   G = sum_l p_l A_l,
// and the minimum over p is attained at the vertex of the anchor with the
// smallest prediction residual on (x, y).

struct Assignment {
  Index anchor = 0;
  double residual_norm = 0.0;  // ||y - A_anchor^T x~||
};

/// Closed-form local model stored as W = C + A_anchor.
struct LocalModel {
  Index anchor = 0;
  double beta = 1.0;  // lambda / (lambda + ||x~||^2)
  Matrix correction;  // C, d' x m
  double residual_norm = 0.0;

  /// ||y - W^T x~||, equal to beta * residual_norm.
  double training_error() const { return beta * residual_norm; }
};

struct FallModel {
  AnchorSet anchors;
  std::vector<LocalModel> locals;
  Matrix train_X;  // n x d, kept for neighbor search at prediction time
  double lambda = 1.0;
  bool with_bias = true;

  Index size() const { return static_cast<Index>(locals.size()); }
  Index input_dim() const { return train_X.cols(); }
  Index output_dim() const { return anchors.output_dim(); }

  /// Materializes W_i = C_i + A_{l_i}.
  Matrix full_model(Index i) const;

  void validate() const;
};

/// Quadratic form p^T H p + b^T p + constant of J(W(p), p).
struct QpForm {
  Matrix H;
  Vector b;
  double constant = 0.0;

  double evaluate(const Eigen::Ref<const Vector>& p) const;
};

/// Best-fitting anchor for (x, y); ties resolve to the lowest index.
Assignment assign_anchor(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                         const AnchorSet& anchors);

LocalModel fit_local_model(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                           const AnchorSet& anchors, double lambda);

/// One local model per training row. Rows are independent, so the result is
/// identical for every thread count.
FallModel fit(const Dataset& data, const AnchorSet& anchors, double lambda, int threads = 1);

/// J(W, p). lambda = 0 is accepted here (pure squared error).
double objective(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                 const Matrix& W, const Eigen::Ref<const Vector>& p, const AnchorSet& anchors,
                 double lambda);

/// dJ/dW = 2 x~ (x~^T W - y^T) + 2 lambda sum_l p_l (W - A_l).
Matrix objective_gradient(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                          const Matrix& W, const Eigen::Ref<const Vector>& p,
                          const AnchorSet& anchors, double lambda);

/// Minimizer of W -> J(W, p) for a fixed simplex vector p.
Matrix fixed_weight_optimum(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                            const Eigen::Ref<const Vector>& p, const AnchorSet& anchors,
                            double lambda);

/// H_ll' = beta x~^T A_l A_l'^T x~ - lambda tr(A_l^T A_l')
/// b_l   = -2 beta y^T A_l^T x~ + lambda ||A_l||_F^2
/// c     = beta ||y||^2
QpForm build_qp(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                const AnchorSet& anchors, double lambda);

/// Throws std::invalid_argument unless p is in the simplex (tolerance 1e-9).
void check_simplex(const Eigen::Ref<const Vector>& p, double tolerance = 1e-9);

/// Uniform draw from the probability simplex of dimension k.
Vector sample_simplex(Index k, std::mt19937_64& rng);

struct VertexReport {
  Index chosen = 0;             // vertex picked by assign_anchor
  double chosen_value = 0.0;    // J(W(delta_chosen), delta_chosen)
  std::vector<double> vertex_values;
  Index interior_trials = 0;
  /// max over candidates of (J_chosen - J_candidate) / max(|J_chosen|, |J_candidate|);
  /// non-positive when the chosen vertex is optimal.
  double worst_violation = 0.0;

  bool optimal(double tolerance = 1e-9) const { return worst_violation <= tolerance; }
};

/// Compares the chosen vertex against every vertex and `trials` uniformly
/// drawn interior points, each evaluated at its own fixed-p optimum.
VertexReport verify_vertex_optimality(const Eigen::Ref<const Vector>& x,
                                      const Eigen::Ref<const Vector>& y, const AnchorSet& anchors,
                                      double lambda, Index trials, std::uint64_t seed);

}  // namespace fall
