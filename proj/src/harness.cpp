#include "fall/harness.hpp"

#include "fall/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace fall {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double mse(const Matrix& Y_true, const Matrix& Y_pred) {
  if (Y_true.rows() != Y_pred.rows() || Y_true.cols() != Y_pred.cols()) {
    throw std::invalid_argument("mse: shapes differ (" + std::to_string(Y_true.rows()) + "x" +
                                std::to_string(Y_true.cols()) + " vs " +
                                std::to_string(Y_pred.rows()) + "x" +
                                std::to_string(Y_pred.cols()) + ")");
  }
  if (Y_true.rows() == 0) throw std::invalid_argument("mse of zero rows");
  return (Y_true - Y_pred).rowwise().squaredNorm().mean();
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double mu = mean(values);
  double ss = 0.0;
  for (const double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

Method parse_method(std::string_view name) {
  if (name == "fall") return Method::fall;
  if (name == "ridge") return Method::ridge;
  if (name == "knn") return Method::knn;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::fall: return "fall";
    case Method::ridge: return "ridge";
    case Method::knn: return "knn";
  }
  return "unknown";
}

// Pipelines ------------------------------------------------------------------------

std::string PipelineConfig::describe() const {
  std::ostringstream os;
  switch (method) {
    case Method::fall:
      os << "lambda=" << fmt_real(fall.lambda) << " k=" << fall.anchors
         << " anchor_neighbors=" << fall.anchor_neighbors << " k_pred=" << fall.pred_neighbors
         << " anchor_alpha=" << fmt_real(fall.anchor_alpha) << " bias=" << (fall.with_bias ? 1 : 0)
         << " anchor_method=" << to_string(fall.anchor_method);
      break;
    case Method::ridge:
      os << "alpha=" << fmt_real(ridge.alpha) << " bias=" << (ridge.with_bias ? 1 : 0);
      break;
    case Method::knn:
      os << "k=" << knn.neighbors << " weighting=" << to_string(knn.weighting);
      break;
  }
  return os.str();
}

Index PipelineConfig::min_rows() const {
  switch (method) {
    case Method::fall:
      return std::max({fall.anchors, fall.anchor_neighbors, fall.pred_neighbors});
    case Method::ridge:
      return 1;
    case Method::knn:
      return knn.neighbors;
  }
  return 1;
}

FittedPipeline::FittedPipeline(PipelineConfig config, std::optional<Standardizer> standardizer,
                               std::variant<FallModel, RidgeModel, KnnModel> model)
    : config_(std::move(config)), standardizer_(std::move(standardizer)), model_(std::move(model)) {}

Matrix FittedPipeline::predict(const Matrix& X) const {
  const Matrix Xs = standardizer_ ? standardizer_->transform(X) : X;
  if (const auto* m = std::get_if<FallModel>(&model_)) {
    return predict_batch(*m, Xs, PredictConfig{config_.fall.pred_neighbors}, config_.threads);
  }
  if (const auto* m = std::get_if<RidgeModel>(&model_)) return m->predict_batch(Xs);
  return knn_predict_batch(std::get<KnnModel>(model_), Xs);
}

FittedPipeline fit_pipeline(const Dataset& train, const PipelineConfig& config) {
  std::optional<Standardizer> standardizer;
  const Dataset* data = &train;
  Dataset scaled;
  if (config.standardize_features) {
    standardizer = fit_standardizer(train, false);
    scaled = standardizer->transform(train);
    data = &scaled;
  }

  switch (config.method) {
    case Method::fall: {
      const FallParams& p = config.fall;
      if (p.pred_neighbors < 1 || p.pred_neighbors > data->rows()) {
        throw std::invalid_argument("k_pred " + std::to_string(p.pred_neighbors) + " outside [1, " +
                                    std::to_string(data->rows()) + "]");
      }
      const AnchorConfig ac{p.anchors, p.anchor_neighbors, p.anchor_method, p.anchor_alpha,
                            p.with_bias, config.seed};
      const AnchorSet anchors = build_anchor_set(*data, ac, config.threads);
      return {config, standardizer, fit(*data, anchors, p.lambda, config.threads)};
    }
    case Method::ridge:
      return {config, standardizer, ridge_fit(*data, config.ridge.alpha, config.ridge.with_bias)};
    case Method::knn:
      return {config, standardizer, knn_fit(*data, config.knn.neighbors, config.knn.weighting)};
  }
  throw std::invalid_argument("unknown method");
}

// Cross-validation -----------------------------------------------------------------

std::vector<IndexList> kfold_indices(Index n, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("need at least 2 folds");
  if (folds > n) {
    throw std::invalid_argument(std::to_string(folds) + " folds exceed " + std::to_string(n) + " rows");
  }
  IndexList order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<IndexList> parts(static_cast<std::size_t>(folds));
  const Index base = n / folds;
  const Index extra = n % folds;
  Index pos = 0;
  for (int f = 0; f < folds; ++f) {
    const Index size = base + (f < extra ? 1 : 0);
    parts[static_cast<std::size_t>(f)].assign(order.begin() + pos, order.begin() + pos + size);
    pos += size;
  }
  return parts;
}

CvReport kfold_cv(const Dataset& data, const PipelineConfig& config, int folds, std::uint64_t seed) {
  const auto parts = kfold_indices(data.rows(), folds, seed);
  CvReport report;
  report.config = config;
  report.seed = seed;
  for (int f = 0; f < folds; ++f) {
    IndexList train_rows;
    for (int g = 0; g < folds; ++g) {
      if (g == f) continue;
      const auto& part = parts[static_cast<std::size_t>(g)];
      train_rows.insert(train_rows.end(), part.begin(), part.end());
    }
    const Dataset train = data.subset(train_rows);
    const Dataset held_out = data.subset(parts[static_cast<std::size_t>(f)]);

    auto start = Clock::now();
    const FittedPipeline fitted = fit_pipeline(train, config);
    report.fit_seconds += seconds_since(start);
    start = Clock::now();
    const Matrix pred = fitted.predict(held_out.X);
    report.predict_seconds += seconds_since(start);
    report.fold_mse.push_back(mse(held_out.Y, pred));
  }
  report.mean_mse = mean(report.fold_mse);
  report.std_mse = sample_std(report.fold_mse);
  return report;
}

// Grid search ---------------------------------------------------------------------

HyperGrid HyperGrid::desk_default() {
  HyperGrid g;
  g.lambdas = {0.01, 1.0, 100.0};
  g.anchor_counts = {20, 60};
  g.anchor_neighbors = {10, 30};
  g.pred_neighbors = {5, 20};
  g.anchor_alphas = {0.01, 1.0, 100.0};
  g.with_bias = {true};
  return g;
}

void HyperGrid::validate() const {
  if (lambdas.empty() || anchor_counts.empty() || anchor_neighbors.empty() ||
      pred_neighbors.empty() || anchor_alphas.empty() || with_bias.empty() || knn_weightings.empty()) {
    throw std::invalid_argument("hyperparameter grid has an empty list");
  }
  auto positive = [](const auto& values) {
    return std::all_of(values.begin(), values.end(), [](auto v) { return v > 0; });
  };
  if (!positive(lambdas) || !positive(anchor_alphas) || !positive(anchor_counts) ||
      !positive(anchor_neighbors) || !positive(pred_neighbors)) {
    throw std::invalid_argument("hyperparameter grid values must be positive");
  }
}

std::vector<PipelineConfig> expand_grid(const HyperGrid& grid, Method method,
                                        const PipelineConfig& base) {
  grid.validate();
  std::vector<PipelineConfig> out;
  PipelineConfig c = base;
  c.method = method;
  switch (method) {
    case Method::fall:
      for (const double lambda : grid.lambdas)
        for (const Index k : grid.anchor_counts)
          for (const Index ka : grid.anchor_neighbors)
            for (const Index kp : grid.pred_neighbors)
              for (const double alpha : grid.anchor_alphas)
                for (const bool bias : grid.with_bias) {
                  c.fall.lambda = lambda;
                  c.fall.anchors = k;
                  c.fall.anchor_neighbors = ka;
                  c.fall.pred_neighbors = kp;
                  c.fall.anchor_alpha = alpha;
                  c.fall.with_bias = bias;
                  out.push_back(c);
                }
      break;
    case Method::ridge:
      for (const double alpha : grid.anchor_alphas)
        for (const bool bias : grid.with_bias) {
          c.ridge = {alpha, bias};
          out.push_back(c);
        }
      break;
    case Method::knn:
      for (const Index k : grid.pred_neighbors)
        for (const KnnWeighting w : grid.knn_weightings) {
          c.knn = {k, w};
          out.push_back(c);
        }
      break;
  }
  return out;
}

GridResult grid_search(const Dataset& data, const std::vector<PipelineConfig>& candidates, int folds,
                       std::uint64_t seed, int threads) {
  if (candidates.empty()) throw std::invalid_argument("empty hyperparameter grid");
  if (folds < 2 || folds > data.rows()) {
    throw std::invalid_argument("invalid fold count " + std::to_string(folds));
  }
  // the largest fold holds ceil(n / folds) rows
  const Index smallest_train = data.rows() - (data.rows() + folds - 1) / folds;

  std::vector<PipelineConfig> feasible;
  for (const auto& c : candidates) {
    if (c.min_rows() <= smallest_train) feasible.push_back(c);
  }
  if (feasible.empty()) {
    throw std::invalid_argument("no grid candidate fits in a training fold of " +
                                std::to_string(smallest_train) + " rows");
  }
  for (auto& c : feasible) c.threads = 1;

  GridResult result;
  result.all.resize(feasible.size());
  parallel_for(static_cast<Index>(feasible.size()), threads, [&](Index i) {
    result.all[static_cast<std::size_t>(i)] = kfold_cv(data, feasible[static_cast<std::size_t>(i)], folds, seed);
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.all.size(); ++i) {
    if (result.all[i].mean_mse < result.all[best].mean_mse) best = i;
  }
  result.best = result.all[best].config;
  result.best.threads = candidates.front().threads;
  result.report = result.all[best];
  return result;
}

// Benchmark ----------------------------------------------------------------------

BenchmarkTable run_benchmark(const Dataset& data, const std::vector<MethodSpec>& methods,
                             const BenchmarkProtocol& protocol) {
  if (protocol.runs < 1) throw std::invalid_argument("benchmark needs runs >= 1");
  if (methods.empty()) throw std::invalid_argument("benchmark needs at least one method");
  for (const auto& m : methods) {
    if (m.candidates.empty()) throw std::invalid_argument("method '" + m.name + "' has no candidates");
  }

  BenchmarkTable table;
  table.threads = protocol.threads;
  table.rows.resize(methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m) table.rows[m].method = methods[m].name;

  for (int run = 0; run < protocol.runs; ++run) {
    const std::uint64_t split_seed = splitmix64(protocol.seed + static_cast<std::uint64_t>(run));
    const Split split = train_test_split(data, protocol.test_fraction, split_seed);
    const std::uint64_t split_hash = hash_rows(split.test_rows);

    for (std::size_t m = 0; m < methods.size(); ++m) {
      BenchmarkRow& row = table.rows[m];
      PipelineConfig chosen = methods[m].candidates.front();
      if (methods[m].candidates.size() > 1) {
        chosen = grid_search(split.train, methods[m].candidates, protocol.folds,
                             splitmix64(split_seed ^ 0x5bd1e995ULL), protocol.threads)
                     .best;
      }
      chosen.threads = protocol.threads;
      chosen.seed = split_seed;

      auto start = Clock::now();
      const FittedPipeline fitted = fit_pipeline(split.train, chosen);
      row.fit_seconds.push_back(seconds_since(start));
      start = Clock::now();
      const Matrix pred = fitted.predict(split.test.X);
      row.predict_seconds.push_back(seconds_since(start));

      row.run_mse.push_back(mse(split.test.Y, pred));
      row.split_hashes.push_back(split_hash);
      row.chosen_params.push_back(chosen.describe());
    }
  }

  for (auto& row : table.rows) {
    row.mse_mean = mean(row.run_mse);
    row.mse_std = sample_std(row.run_mse);
    row.fit_time_mean = mean(row.fit_seconds);
    row.predict_time_mean = mean(row.predict_seconds);
    std::map<std::string, int> counts;
    for (const auto& p : row.chosen_params) ++counts[p];
    int best = 0;
    for (const auto& p : row.chosen_params) {
      if (counts[p] > best) {
        best = counts[p];
        row.params = p;
      }
    }
  }
  return table;
}

void write_benchmark_csv(std::ostream& out, const BenchmarkTable& table) {
  out << "method,mse_mean,mse_std,fit_time_mean,predict_time_mean,params\n";
  char buf[256];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.10g,%.10g,%.3f,%.3f,", r.method.c_str(), r.mse_mean,
                  r.mse_std, r.fit_time_mean, r.predict_time_mean);
    out << buf << '"' << r.params << "\"\n";
  }
}

void write_benchmark_text(std::ostream& out, const BenchmarkTable& table) {
  std::size_t method_w = 6;
  for (const auto& r : table.rows) method_w = std::max(method_w, r.method.size());
  out << std::left << std::setw(static_cast<int>(method_w)) << "method" << std::right
      << std::setw(14) << "mse_mean" << std::setw(14) << "mse_std" << std::setw(15)
      << "fit_time_mean" << std::setw(19) << "predict_time_mean"
      << "  params\n";
  for (const auto& r : table.rows) {
    out << std::left << std::setw(static_cast<int>(method_w)) << r.method << std::right << std::fixed
        << std::setprecision(4) << std::setw(14) << r.mse_mean << std::setw(14) << r.mse_std
        << std::setprecision(3) << std::setw(15) << r.fit_time_mean << std::setw(19)
        << r.predict_time_mean << "  " << r.params << '\n';
  }
  out.unsetf(std::ios::floatfield);
  out << "threads: " << table.threads << '\n';
}

}  // namespace fall
