#pragma once

#include "fall/anchors.hpp"
#include "fall/baselines.hpp"
#include "fall/core.hpp"
#include "fall/dataset.hpp"
#include "fall/predict.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace fall {

/// Mean over rows of the squared Euclidean error.
double mse(const Matrix& Y_true, const Matrix& Y_pred);

enum class Method { fall, ridge, knn };

Method parse_method(std::string_view name);
std::string_view to_string(Method method);

struct FallParams {
  double lambda = 1.0;
  Index anchors = 20;
  Index anchor_neighbors = 20;
  Index pred_neighbors = 20;
  double anchor_alpha = 1.0;
  bool with_bias = true;
  AnchorMethod anchor_method = AnchorMethod::kmeans;
};

struct RidgeParams {
  double alpha = 1.0;
  bool with_bias = true;
};

struct KnnParams {
  Index neighbors = 5;
  KnnWeighting weighting = KnnWeighting::uniform;
};

/// One fully specified method + hyperparameters. Feature standardization is
/// fitted on the training rows only and applied to anything predicted.
struct PipelineConfig {
  Method method = Method::fall;
  FallParams fall;
  RidgeParams ridge;
  KnnParams knn;
  bool standardize_features = true;
  std::uint64_t seed = 0;  // anchor selection
  int threads = 1;

  /// Hyperparameters of the selected method, e.g. "lambda=1 k=20 ...".
  std::string describe() const;
  /// Largest training-set row requirement (k, K_anchors, K_pred, K).
  Index min_rows() const;
};

class FittedPipeline {
 public:
  FittedPipeline(PipelineConfig config, std::optional<Standardizer> standardizer,
                 std::variant<FallModel, RidgeModel, KnnModel> model);

  Matrix predict(const Matrix& X) const;

  const PipelineConfig& config() const { return config_; }
  const std::optional<Standardizer>& standardizer() const { return standardizer_; }
  const std::variant<FallModel, RidgeModel, KnnModel>& model() const { return model_; }

 private:
  PipelineConfig config_;
  std::optional<Standardizer> standardizer_;
  std::variant<FallModel, RidgeModel, KnnModel> model_;
};

FittedPipeline fit_pipeline(const Dataset& train, const PipelineConfig& config);

// Cross-validation -----------------------------------------------------------

struct CvReport {
  std::vector<double> fold_mse;
  double mean_mse = 0.0;
  double std_mse = 0.0;          // sample standard deviation over folds
  double fit_seconds = 0.0;      // summed over folds
  double predict_seconds = 0.0;  // summed over folds
  PipelineConfig config;
  std::uint64_t seed = 0;
};

/// Seeded partition of [0, n) into `folds` disjoint, covering, nonempty parts.
std::vector<IndexList> kfold_indices(Index n, int folds, std::uint64_t seed);

CvReport kfold_cv(const Dataset& data, const PipelineConfig& config, int folds,
                  std::uint64_t seed);

/// Hyperparameter lists. Ridge draws from anchor_alphas x with_bias, KNN from
/// pred_neighbors x knn_weightings.
struct HyperGrid {
  std::vector<double> lambdas;
  std::vector<Index> anchor_counts;
  std::vector<Index> anchor_neighbors;
  std::vector<Index> pred_neighbors;
  std::vector<double> anchor_alphas;
  std::vector<bool> with_bias;
  std::vector<KnnWeighting> knn_weightings{KnnWeighting::uniform, KnnWeighting::inverse_distance};

  /// lambda {0.01,1,100}, k {20,60}, K_anchors {10,30}, K_pred {5,20},
  /// alpha {0.01,1,100}, bias {true}.
  static HyperGrid desk_default();

  void validate() const;
};

/// Every combination for `method`, in nested-loop order, starting from `base`.
std::vector<PipelineConfig> expand_grid(const HyperGrid& grid, Method method,
                                        const PipelineConfig& base = {});

struct GridResult {
  PipelineConfig best;
  CvReport report;
  std::vector<CvReport> all;  // one per evaluated candidate, in input order
};

/// Candidates needing more rows than the smallest training fold holds are
/// skipped. Ties go to the earliest candidate.
GridResult grid_search(const Dataset& data, const std::vector<PipelineConfig>& candidates,
                       int folds, std::uint64_t seed, int threads = 1);

// Benchmark ------------------------------------------------------------------

struct BenchmarkProtocol {
  int runs = 10;
  double test_fraction = 0.1;
  int folds = 3;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct MethodSpec {
  std::string name;
  std::vector<PipelineConfig> candidates;  // a single entry skips tuning
};

struct BenchmarkRow {
  std::string method;
  std::vector<double> run_mse;
  std::vector<double> fit_seconds;
  std::vector<double> predict_seconds;
  std::vector<std::uint64_t> split_hashes;
  std::vector<std::string> chosen_params;
  double mse_mean = 0.0;
  double mse_std = 0.0;
  double fit_time_mean = 0.0;
  double predict_time_mean = 0.0;
  std::string params;  // most frequently chosen configuration
};

struct BenchmarkTable {
  std::vector<BenchmarkRow> rows;
  int threads = 1;
};

/// Repeated random train/test splits shared by all methods; per split each
/// method is tuned by k-fold CV on the training side, refitted, and scored.
BenchmarkTable run_benchmark(const Dataset& data, const std::vector<MethodSpec>& methods,
                             const BenchmarkProtocol& protocol);

void write_benchmark_csv(std::ostream& out, const BenchmarkTable& table);
void write_benchmark_text(std::ostream& out, const BenchmarkTable& table);

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_std(const std::vector<double>& values);
double mean(const std::vector<double>& values);

}  // namespace fall
