#include "fall/anchors.hpp"

#include "fall/neighbors.hpp"
#include "fall/parallel.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace fall {

AnchorMethod parse_anchor_method(std::string_view name) {
  if (name == "random") return AnchorMethod::random;
  if (name == "kmeans") return AnchorMethod::kmeans;
  throw std::invalid_argument("unknown anchor method '" + std::string(name) + "'");
}

std::string_view to_string(AnchorMethod method) {
  return method == AnchorMethod::random ? "random" : "kmeans";
}

void AnchorSet::validate() const {
  if (models.empty()) throw std::invalid_argument("anchor set is empty");
  if (points.size() != models.size() || neighbor_sets.size() != models.size()) {
    throw std::invalid_argument("anchor set fields have inconsistent lengths");
  }
  const Index rows = models.front().rows();
  const Index cols = models.front().cols();
  if (rows < (with_bias ? 2 : 1) || cols < 1) throw std::invalid_argument("anchor model has no entries");
  for (std::size_t l = 0; l < models.size(); ++l) {
    if (models[l].rows() != rows || models[l].cols() != cols) {
      throw std::invalid_argument("anchor models differ in shape");
    }
    if (!models[l].allFinite()) throw std::invalid_argument("anchor model has non-finite entries");
    if (points[l].size() != input_dim()) throw std::invalid_argument("anchor point has wrong dimension");
    if (neighbor_sets[l].empty()) throw std::invalid_argument("anchor neighbor set is empty");
    for (const Index j : neighbor_sets[l]) {
      if (j < 0) throw std::invalid_argument("negative neighbor index");
    }
  }
}

// k-means ------------------------------------------------------------------------

Index count_distinct_rows(const Matrix& X) {
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(X.rows()));
  for (Index i = 0; i < X.rows(); ++i) {
    const Vector row = X.row(i).transpose();
    rows.emplace_back(row.data(), row.data() + row.size());
  }
  std::sort(rows.begin(), rows.end());
  return static_cast<Index>(std::unique(rows.begin(), rows.end()) - rows.begin());
}

namespace {

// Nearest center for every row; ties to the lower center index.
double assign_rows(const Matrix& X, const Matrix& centers, IndexList& labels,
                   std::vector<double>& sq_dist) {
  double total = 0.0;
  for (Index i = 0; i < X.rows(); ++i) {
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centers.rows(); ++c) {
      const double d = (X.row(i) - centers.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    sq_dist[static_cast<std::size_t>(i)] = best_d;
    total += best_d;
  }
  return total;
}

Matrix kmeans_plus_plus(const Matrix& X, Index k, std::mt19937_64& rng) {
  const Index n = X.rows();
  Matrix centers(k, X.cols());
  std::uniform_int_distribution<Index> pick(0, n - 1);
  centers.row(0) = X.row(pick(rng));

  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = (X.row(i) - centers.row(0)).squaredNorm();

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    const double target = unit(rng) * total;
    Index chosen = -1;
    double cumulative = 0.0;
    for (Index i = 0; i < n; ++i) {
      cumulative += d2[static_cast<std::size_t>(i)];
      if (cumulative > target) {
        chosen = i;
        break;
      }
    }
    if (chosen < 0) {
      // rounding pushed target to the total: take the last row still uncovered
      for (Index i = n - 1; i >= 0; --i) {
        if (d2[static_cast<std::size_t>(i)] > 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centers.row(c) = X.row(chosen);
    for (Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], (X.row(i) - centers.row(c)).squaredNorm());
    }
  }
  return centers;
}

}  // namespace

KMeansResult kmeans(const Matrix& X, Index k, std::uint64_t seed, const KMeansOptions& options) {
  const Index n = X.rows();
  if (n < 1) throw std::invalid_argument("kmeans on empty data");
  if (k < 1) throw std::invalid_argument("kmeans needs k >= 1");
  const Index distinct = count_distinct_rows(X);
  if (k > distinct) {
    throw std::invalid_argument("kmeans k = " + std::to_string(k) + " exceeds the " +
                                std::to_string(distinct) + " distinct points");
  }

  std::mt19937_64 rng(seed);
  KMeansResult result;
  result.centers = kmeans_plus_plus(X, k, rng);
  result.labels.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> sq_dist(static_cast<std::size_t>(n));

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.objective_trace.push_back(assign_rows(X, result.centers, result.labels, sq_dist));
    ++result.iterations;

    Matrix sums = Matrix::Zero(k, X.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      const Index c = result.labels[static_cast<std::size_t>(i)];
      sums.row(c) += X.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }

    Matrix updated(k, X.cols());
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        updated.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // empty cluster: move it to the worst-served point
      Index far = -1;
      for (Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        if (far < 0 || sq_dist[static_cast<std::size_t>(i)] > sq_dist[static_cast<std::size_t>(far)]) far = i;
      }
      taken[static_cast<std::size_t>(far)] = true;
      updated.row(c) = X.row(far);
      sq_dist[static_cast<std::size_t>(far)] = 0.0;
    }

    const double shift = (updated - result.centers).rowwise().norm().maxCoeff();
    result.centers = std::move(updated);
    if (shift < options.tolerance) break;
  }
  result.objective_trace.push_back(assign_rows(X, result.centers, result.labels, sq_dist));
  return result;
}

std::vector<Vector> select_anchor_points(const Matrix& X, Index k, AnchorMethod method,
                                         std::uint64_t seed) {
  const Index n = X.rows();
  if (k < 1) throw std::invalid_argument("number of anchors must be >= 1");
  std::vector<Vector> points;
  points.reserve(static_cast<std::size_t>(k));

  if (method == AnchorMethod::random) {
    if (k > n) {
      throw std::invalid_argument("cannot draw " + std::to_string(k) + " random anchors from " +
                                  std::to_string(n) + " rows");
    }
    IndexList order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    for (Index l = 0; l < k; ++l) points.emplace_back(X.row(order[static_cast<std::size_t>(l)]).transpose());
    return points;
  }

  const KMeansResult km = kmeans(X, k, seed);
  for (Index l = 0; l < k; ++l) points.emplace_back(km.centers.row(l).transpose());
  return points;
}

IndexList neighbor_set(const Matrix& X, const Eigen::Ref<const Vector>& anchor_point, Index count) {
  IndexList rows;
  for (const auto& nb : nearest_rows(X, anchor_point, count)) rows.push_back(nb.row);
  return rows;
}

// Ridge ------------------------------------------------------------------------------

Matrix fit_ridge_rows(const Matrix& X, const Matrix& Y, const IndexList& rows, double ridge_alpha,
                      bool with_bias) {
  if (rows.empty()) throw std::invalid_argument("ridge fit needs at least one row");
  if (!(ridge_alpha > 0.0)) throw std::invalid_argument("ridge alpha must be > 0");

  const Index d = X.cols();
  const Index dp = d + (with_bias ? 1 : 0);
  const auto s = static_cast<Index>(rows.size());
  Matrix Xa(s, dp);
  Matrix Ys(s, Y.cols());
  for (Index r = 0; r < s; ++r) {
    const Index src = rows[static_cast<std::size_t>(r)];
    if (src < 0 || src >= X.rows()) throw std::out_of_range("ridge row index out of range");
    Xa.row(r).head(d) = X.row(src);
    if (with_bias) Xa(r, d) = 1.0;
    Ys.row(r) = Y.row(src);
  }

  Matrix gram = Matrix::Identity(dp, dp) * ridge_alpha;
  gram.selfadjointView<Eigen::Lower>().rankUpdate(Xa.transpose());
  const Eigen::LLT<Matrix, Eigen::Lower> llt(gram);
  if (llt.info() != Eigen::Success) throw std::runtime_error("ridge normal equations not positive definite");
  Matrix A = llt.solve(Xa.transpose() * Ys);
  if (!A.allFinite()) throw std::runtime_error("ridge fit produced non-finite coefficients");
  return A;
}

Matrix fit_anchor_model(const Dataset& data, const IndexList& rows, double ridge_alpha,
                        bool with_bias) {
  return fit_ridge_rows(data.X, data.Y, rows, ridge_alpha, with_bias);
}

AnchorSet build_anchor_set(const Dataset& data, const AnchorConfig& config, int threads) {
  const Index n = data.rows();
  if (config.neighbors < 1 || config.neighbors > n) {
    throw std::invalid_argument("anchor neighbors " + std::to_string(config.neighbors) +
                                " outside [1, " + std::to_string(n) + "]");
  }
  if (!(config.ridge_alpha > 0.0)) throw std::invalid_argument("anchor ridge alpha must be > 0");

  AnchorSet set;
  set.with_bias = config.with_bias;
  set.ridge_alpha = config.ridge_alpha;
  set.points = select_anchor_points(data.X, config.count, config.method, config.seed);
  const Index k = static_cast<Index>(set.points.size());
  set.models.resize(static_cast<std::size_t>(k));
  set.neighbor_sets.resize(static_cast<std::size_t>(k));

  parallel_for(k, threads, [&](Index l) {
    const auto slot = static_cast<std::size_t>(l);
    set.neighbor_sets[slot] = neighbor_set(data.X, set.points[slot], config.neighbors);
    set.models[slot] = fit_anchor_model(data, set.neighbor_sets[slot], config.ridge_alpha, config.with_bias);
  });
  set.validate();
  return set;
}

}  // namespace fall
