#include "cli.hpp"

#include "fall/harness.hpp"
#include "fall/model_io.hpp"
#include "fall/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

namespace fall::cli {

namespace {

// Thrown for semantically bad arguments that CLI11 cannot catch itself.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string one_line(std::string text) {
  for (char& c : text)
    if (c == '\n' || c == '\r') c = ' ';
  while (!text.empty() && text.back() == ' ') text.pop_back();
  return text;
}

// Output goes to a file when a path is given, otherwise to `fallback`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw DataError("cannot write '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw DataError("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

struct DataArgs {
  std::string path;
  std::vector<std::string> targets;
  std::vector<std::string> ignore;
  bool no_header = false;

  void attach(CLI::App* app) {
    app->add_option("--data", path, "Input CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--target", targets, "Target column name(s), comma separated")
        ->required()
        ->delimiter(',');
    app->add_option("--ignore", ignore, "Columns to drop, comma separated")->delimiter(',');
    app->add_flag("--no-header", no_header, "CSV has no header row; columns are named 0, 1, ...");
  }

  Dataset load() const {
    CsvOptions options;
    options.has_header = !no_header;
    options.ignore_columns = ignore;
    return load_csv(path, targets, options);
  }
};

// fit --------------------------------------------------------------------------

struct FitArgs {
  DataArgs data;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 1;
  FallParams params;
  std::string anchor_method = "kmeans";
  bool no_standardize = false;
};

int do_fit(const FitArgs& a, std::ostream& out) {
  const Dataset data = a.data.load();
  PipelineConfig config;
  config.method = Method::fall;
  config.fall = a.params;
  config.fall.anchor_method = parse_anchor_method(a.anchor_method);
  config.standardize_features = !a.no_standardize;
  config.seed = a.seed;
  config.threads = a.threads;

  const auto start = std::chrono::steady_clock::now();
  const FittedPipeline fitted = fit_pipeline(data, config);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const ModelBundle bundle = bundle_from(fitted, data);
  save_model(a.out, bundle);

  char time_text[32];
  std::snprintf(time_text, sizeof(time_text), "%.3f", seconds);
  out << "n=" << data.rows() << " d=" << data.features() << " m=" << data.targets()
      << " k=" << bundle.model.anchors.size() << " lambda=" << number(bundle.model.lambda)
      << " fit_time=" << time_text << "s\n";
  out << "model written to " << a.out << '\n';
  return kExitOk;
}

// predict ----------------------------------------------------------------------

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
  Index k_pred = 0;  // 0 keeps the value stored in the model
  int threads = 1;
  bool no_header = false;
  bool proba = false;
};

// Picks the model's feature columns by name when the header has them all,
// otherwise requires exactly d columns in order.
Matrix feature_matrix(const CsvTable& table, const ModelBundle& bundle, bool has_header) {
  const Index d = bundle.model.input_dim();
  if (has_header) {
    std::vector<Index> cols;
    for (const auto& name : bundle.feature_names) {
      const auto it = std::find(table.columns.begin(), table.columns.end(), name);
      if (it == table.columns.end()) break;
      cols.push_back(static_cast<Index>(it - table.columns.begin()));
    }
    if (static_cast<Index>(cols.size()) == d) {
      Matrix X(table.values.rows(), d);
      for (Index j = 0; j < d; ++j) X.col(j) = table.values.col(cols[static_cast<std::size_t>(j)]);
      return X;
    }
  }
  if (table.values.cols() != d) {
    throw DataError("input has " + std::to_string(table.values.cols()) + " columns, model expects " +
                    std::to_string(d) + " features");
  }
  return table.values;
}

int do_predict(const PredictArgs& a, std::ostream& out) {
  const ModelBundle bundle = load_model(std::filesystem::path(a.model));
  const CsvTable table = read_csv_table(a.data, !a.no_header);
  Matrix X = feature_matrix(table, bundle, !a.no_header);

  PredictConfig config = bundle.predict;
  if (a.k_pred > 0) config.neighbors = a.k_pred;
  if (config.neighbors > bundle.model.size()) {
    throw UsageError("--k-pred " + std::to_string(config.neighbors) + " exceeds the " +
                     std::to_string(bundle.model.size()) + " training rows");
  }
  if (bundle.standardizer) X = bundle.standardizer->transform(X);
  Matrix Y = predict_batch(bundle.model, X, config, a.threads);
  if (bundle.standardizer && bundle.standardizer->applied_to_targets) {
    Y = bundle.standardizer->inverse_transform_targets(Y);
  }

  Sink sink(a.out, out);
  std::ostream& os = *sink;
  for (std::size_t j = 0; j < bundle.target_names.size(); ++j) os << (j ? "," : "") << bundle.target_names[j];
  if (a.proba) os << ",label";
  os << '\n';
  for (Index i = 0; i < Y.rows(); ++i) {
    for (Index j = 0; j < Y.cols(); ++j) os << (j ? "," : "") << number(Y(i, j));
    if (a.proba) os << ',' << argmax_label(Y.row(i).transpose());
    os << '\n';
  }
  sink.finish();
  return kExitOk;
}

// cluster ----------------------------------------------------------------------

int do_cluster(const std::string& model_path, const std::string& out_path, std::ostream& out) {
  const ModelBundle bundle = load_model(std::filesystem::path(model_path));
  Sink sink(out_path, out);
  std::ostream& os = *sink;
  os << "row,anchor,residual,beta\n";
  for (Index i = 0; i < bundle.model.size(); ++i) {
    const LocalModel& local = bundle.model.locals[static_cast<std::size_t>(i)];
    os << i << ',' << local.anchor + 1 << ',' << number(local.residual_norm) << ','
       << number(local.beta) << '\n';
  }
  sink.finish();
  return kExitOk;
}

// bench ------------------------------------------------------------------------

struct BenchArgs {
  DataArgs data;
  std::vector<std::string> methods{"fall", "ridge"};
  BenchmarkProtocol protocol;
  std::string csv;
  HyperGrid grid = HyperGrid::desk_default();
  std::string anchor_method = "kmeans";
  bool no_bias = false;
  bool no_standardize = false;
};

int do_bench(BenchArgs a, std::ostream& out) {
  if (a.no_bias) a.grid.with_bias = {false};
  a.grid.validate();

  PipelineConfig base;
  base.fall.anchor_method = parse_anchor_method(a.anchor_method);
  base.standardize_features = !a.no_standardize;
  base.threads = a.protocol.threads;

  std::vector<MethodSpec> specs;
  for (const auto& name : a.methods) {
    Method method;
    try {
      method = parse_method(name);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    specs.push_back({std::string(to_string(method)), expand_grid(a.grid, method, base)});
  }

  const Dataset data = a.data.load();
  const BenchmarkTable table = run_benchmark(data, specs, a.protocol);
  write_benchmark_text(out, table);
  if (!a.csv.empty()) {
    Sink sink(a.csv, out);
    write_benchmark_csv(*sink, table);
    sink.finish();
  }
  return kExitOk;
}

// synth ------------------------------------------------------------------------

struct SynthArgs {
  std::string kind;
  Index n = 200;
  double sigma = 0.1;
  std::uint64_t seed = 0;
  std::string out;
};

int do_synth(const SynthArgs& a, std::ostream& out) {
  const SyntheticDataset s = a.kind == "step" ? synth_step(a.n, a.sigma, a.seed)
                                              : synth_two_moons(a.n, a.sigma, a.seed);
  Sink sink(a.out, out);
  write_csv(*sink, s.data, &s.group, a.kind == "step" ? "plateau" : "label");
  sink.finish();
  return kExitOk;
}

// verify -----------------------------------------------------------------------

int do_verify(const VerifyConfig& config, std::ostream& out) {
  const VerifySummary summary = run_verification(config);
  out << summary.describe();
  out << (summary.passed() ? "verification passed" : "verification FAILED") << '\n';
  return summary.passed() ? kExitOk : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fast anchor-based local linear models", "fall"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fall 0.1.0");

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model on a CSV and save it");
  fit_args.data.attach(fit_cmd);
  fit_cmd->add_option("--out", fit_args.out, "Model file to write")->required();
  fit_cmd->add_option("--seed", fit_args.seed, "Seed for anchor selection")->capture_default_str();
  fit_cmd->add_option("--threads", fit_args.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit_cmd->add_option("--lambda", fit_args.params.lambda, "Regularization strength")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit_cmd->add_option("--k", fit_args.params.anchors, "Number of anchors")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit_cmd->add_option("--anchor-neighbors", fit_args.params.anchor_neighbors,
                      "Rows used to fit each anchor model")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit_cmd->add_option("--anchor-alpha", fit_args.params.anchor_alpha, "Ridge penalty of anchor models")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit_cmd->add_option("--k-pred", fit_args.params.pred_neighbors, "Neighbors used at prediction time")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit_cmd->add_flag("--bias,!--no-bias", fit_args.params.with_bias, "Append a bias input (default on)");
  fit_cmd->add_option("--anchor-method", fit_args.anchor_method, "kmeans or random")
      ->check(CLI::IsMember({"kmeans", "random"}))
      ->capture_default_str();
  fit_cmd->add_flag("--no-standardize", fit_args.no_standardize, "Use raw feature scales");

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Predict targets for a CSV of inputs");
  predict_cmd->add_option("--model", predict_args.model, "Model file")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--data", predict_args.data, "Input CSV")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--out", predict_args.out, "Output CSV (default stdout)");
  predict_cmd->add_option("--k-pred", predict_args.k_pred, "Override the stored K_pred")
      ->check(CLI::PositiveNumber);
  predict_cmd->add_option("--threads", predict_args.threads, "Worker threads")->check(CLI::PositiveNumber);
  predict_cmd->add_flag("--no-header", predict_args.no_header, "Input has no header row");
  predict_cmd->add_flag("--proba", predict_args.proba, "Also emit the argmax label column");

  std::string cluster_model;
  std::string cluster_out;
  auto* cluster_cmd = app.add_subcommand("cluster", "Print the anchor assigned to each training row");
  cluster_cmd->add_option("--model", cluster_model, "Model file")->required()->check(CLI::ExistingFile);
  cluster_cmd->add_option("--out", cluster_out, "Output CSV (default stdout)");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Repeated-split benchmark with grid search");
  bench_args.data.attach(bench_cmd);
  bench_cmd->add_option("--methods", bench_args.methods, "Methods to compare: fall,ridge,knn")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--runs", bench_args.protocol.runs, "Random splits")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--folds", bench_args.protocol.folds, "Cross-validation folds")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  bench_cmd->add_option("--test-fraction", bench_args.protocol.test_fraction, "Held-out share per split")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench_args.protocol.seed, "Seed for splits and folds")->capture_default_str();
  bench_cmd->add_option("--threads", bench_args.protocol.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--csv", bench_args.csv, "Also write the table as CSV");
  bench_cmd->add_option("--lambda", bench_args.grid.lambdas, "Lambda grid")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--k", bench_args.grid.anchor_counts, "Anchor count grid")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--anchor-neighbors", bench_args.grid.anchor_neighbors, "K_anchors grid")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--k-pred", bench_args.grid.pred_neighbors, "K_pred grid (also the KNN K grid)")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--anchor-alpha", bench_args.grid.anchor_alphas, "Ridge alpha grid")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_flag("--no-bias", bench_args.no_bias, "Fit without a bias input");
  bench_cmd->add_option("--anchor-method", bench_args.anchor_method, "kmeans or random")
      ->check(CLI::IsMember({"kmeans", "random"}));
  bench_cmd->add_flag("--no-standardize", bench_args.no_standardize, "Use raw feature scales");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset as CSV");
  synth_cmd->add_option("kind", synth_args.kind, "step or moons")
      ->required()
      ->check(CLI::IsMember({"step", "moons"}));
  synth_cmd->add_option("--n", synth_args.n, "Rows")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--sigma", synth_args.sigma, "Noise standard deviation")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_args.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--out", synth_args.out, "Output CSV (default stdout)");

  VerifyConfig verify_config;
  auto* verify_cmd = app.add_subcommand("verify", "Numerically check the closed-form solution");
  verify_cmd->add_option("--instances", verify_config.instances, "Random instances")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify_cmd->add_option("--trials", verify_config.trials, "Interior simplex points per instance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify_cmd->add_option("--qp-points", verify_config.qp_points, "Simplex points for the quadratic form check")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify_config.seed, "Random seed")->capture_default_str();
  verify_cmd->add_option("--tolerance", verify_config.tolerance, "Relative slack for vertex optimality")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  verify_cmd->add_option("--max-d", verify_config.shape.max_d, "Largest input dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify_cmd->add_option("--max-m", verify_config.shape.max_m, "Largest output dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify_cmd->add_option("--max-k", verify_config.shape.max_k, "Largest anchor count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "fall: " << one_line(e.what()) << " (see --help)\n";
    return kExitUsage;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  try {
    if (chosen == fit_cmd) return do_fit(fit_args, out);
    if (chosen == predict_cmd) return do_predict(predict_args, out);
    if (chosen == cluster_cmd) return do_cluster(cluster_model, cluster_out, out);
    if (chosen == bench_cmd) return do_bench(bench_args, out);
    if (chosen == synth_cmd) return do_synth(synth_args, out);
    if (chosen == verify_cmd) return do_verify(verify_config, out);
  } catch (const UsageError& e) {
    err << "fall " << name << ": " << one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "fall " << name << ": " << one_line(e.what()) << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace fall::cli
