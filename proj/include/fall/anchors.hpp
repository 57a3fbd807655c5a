#pragma once

#include "fall/dataset.hpp"
#include "fall/types.hpp"

#include <cstdint>
#include <string_view>

namespace fall {

enum class AnchorMethod { random, kmeans };

AnchorMethod parse_anchor_method(std::string_view name);
std::string_view to_string(AnchorMethod method);

/// k linear reference models, each fitted by ridge regression on the
/// neighborhood of one anchor point.
struct AnchorSet {
  std::vector<Matrix> models;  // each d' x m
  std::vector<Vector> points;  // each in R^d
  std::vector<IndexList> neighbor_sets;
  bool with_bias = true;
  double ridge_alpha = 1.0;

  Index size() const { return static_cast<Index>(models.size()); }
  /// d, the raw input dimension.
  Index input_dim() const { return model_rows() - (with_bias ? 1 : 0); }
  /// d' = d + 1 with bias, d otherwise.
  Index model_rows() const { return models.empty() ? 0 : models.front().rows(); }
  Index output_dim() const { return models.empty() ? 0 : models.front().cols(); }

  void validate() const;
};

struct AnchorConfig {
  Index count = 20;       // k
  Index neighbors = 20;   // neighborhood size for each anchor fit
  AnchorMethod method = AnchorMethod::kmeans;
  double ridge_alpha = 1.0;
  bool with_bias = true;
  std::uint64_t seed = 0;
};

struct KMeansOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;  // largest center shift at convergence
};

struct KMeansResult {
  Matrix centers;  // k x d
  IndexList labels;
  /// Sum of squared distances after each assignment step.
  std::vector<double> objective_trace;
  int iterations = 0;
};

/// kmeans++ seeding followed by Lloyd iterations. An emptied cluster is
/// reseeded at the point farthest from its current center.
KMeansResult kmeans(const Matrix& X, Index k, std::uint64_t seed,
                    const KMeansOptions& options = {});

/// Number of distinct rows of X.
Index count_distinct_rows(const Matrix& X);

std::vector<Vector> select_anchor_points(const Matrix& X, Index k, AnchorMethod method,
                                         std::uint64_t seed);

/// Indices of the `count` rows nearest to `anchor_point`, ties to lower index.
IndexList neighbor_set(const Matrix& X, const Eigen::Ref<const Vector>& anchor_point,
                       Index count);

/// Ridge solution over the selected rows:
///   argmin_A sum_j ||y_j - A^T x~_j||^2 + alpha ||A||_F^2
/// solved through the normal equations with a Cholesky factorization.
Matrix fit_anchor_model(const Dataset& data, const IndexList& rows, double ridge_alpha,
                        bool with_bias);
Matrix fit_ridge_rows(const Matrix& X, const Matrix& Y, const IndexList& rows,
                      double ridge_alpha, bool with_bias);

AnchorSet build_anchor_set(const Dataset& data, const AnchorConfig& config, int threads = 1);

}  // namespace fall
