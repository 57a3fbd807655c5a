// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "cli.hpp"

#include "fall/harness.hpp"
#include "fall/model_io.hpp"
#include "fall/verify.hpp"

#include <algorithm>
#include <cfloat>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>
#include <unistd.h>

#ifndef FALL_DATA_DIR
#define FALL_DATA_DIR "data"
#endif

using namespace fall;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("%s criterion %2d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

Vector vertex(Index k, Index l) {
  Vector p = Vector::Zero(k);
  p(l) = 1.0;
  return p;
}

// 1. vertex optimality -----------------------------------------------------------

void closed_form_optimality() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  double worst = -DBL_MAX;
  int bad = 0;
  for (int t = 0; t < 200; ++t) {
    const Instance inst = random_instance(rng);
    const VertexReport r = verify_vertex_optimality(inst.x, inst.y, inst.anchors, inst.lambda, 1000, rng());
    worst = std::max(worst, r.worst_violation);
    if (!r.optimal(1e-9)) ++bad;
  }
  const double secs = seconds_since(start);
  report(1, bad == 0 && secs < 30.0,
         fmt("200 instances x 1000 interior points, worst relative violation %.3g (slack 1e-9), %d failures, %.2f s",
             worst, bad, secs));
}

// 2. gradient ---------------------------------------------------------------------

void gradient_check() {
  std::mt19937_64 rng(202);
  std::normal_distribution<double> gauss;
  double worst_zero = 0.0, worst_fd = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Instance inst = random_instance(rng);
    const AnchorSet& a = inst.anchors;
    const LocalModel local = fit_local_model(inst.x, inst.y, a, inst.lambda);
    const Vector p = vertex(a.size(), local.anchor);
    const Matrix W = local.correction + a.models[static_cast<std::size_t>(local.anchor)];

    worst_zero = std::max(worst_zero,
                          objective_gradient(inst.x, inst.y, W, p, a, inst.lambda).norm() / (1.0 + W.norm()));

    Matrix W1 = W;
    for (Index i = 0; i < W1.size(); ++i) W1(i) += gauss(rng);
    const Vector q = sample_simplex(a.size(), rng);
    const Matrix g = objective_gradient(inst.x, inst.y, W1, q, a, inst.lambda);
    Matrix fd(W.rows(), W.cols());
    for (Index i = 0; i < W.size(); ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(W1(i)));
      Matrix plus = W1, minus = W1;
      plus(i) += h;
      minus(i) -= h;
      fd(i) = (objective(inst.x, inst.y, plus, q, a, inst.lambda) -
               objective(inst.x, inst.y, minus, q, a, inst.lambda)) / (2 * h);
    }
    worst_fd = std::max(worst_fd, (fd - g).norm() / std::max(g.norm(), DBL_MIN));
  }
  report(2, worst_zero < 1e-8 && worst_fd < 1e-5,
         fmt("100 instances, |grad at W_hat| / (1+|W_hat|) %.3g (< 1e-8), finite differences relative %.3g (< 1e-5)",
             worst_zero, worst_fd));
}

// 3 and 4. quadratic form ------------------------------------------------------

void quadratic_form() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Instance inst = random_instance(rng);
    const QpForm qp = build_qp(inst.x, inst.y, inst.anchors, inst.lambda);
    for (int j = 0; j < 100; ++j) {
      const Vector p = sample_simplex(inst.anchors.size(), rng);
      const Matrix W = fixed_weight_optimum(inst.x, inst.y, p, inst.anchors, inst.lambda);
      const double direct = objective(inst.x, inst.y, W, p, inst.anchors, inst.lambda);
      worst = std::max(worst, std::abs(qp.evaluate(p) - direct) / std::max(std::abs(direct), DBL_MIN));
    }
  }
  report(3, worst < 1e-8, fmt("50 instances x 100 simplex points, worst relative error %.3g (< 1e-8)", worst));
}

void negative_definite() {
  std::mt19937_64 rng(404);
  InstanceShape shape;
  shape.generic_anchors = true;
  double worst = -DBL_MAX, worst_ratio = -DBL_MAX;
  for (int t = 0; t < 100; ++t) {
    const Instance inst = random_instance(rng, shape);
    const QpForm qp = build_qp(inst.x, inst.y, inst.anchors, inst.lambda);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(qp.H, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().maxCoeff();
    worst = std::max(worst, top);
    worst_ratio = std::max(worst_ratio, top / eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  report(4, worst < 0.0 && worst_ratio < -1e-12,
         fmt("100 generic instances, largest eigenvalue of H %.3g (< 0), largest eig / |H|_2 %.3g (< -1e-12)", worst,
             worst_ratio));
}

// 5. identities --------------------------------------------------------------------

void identities() {
  std::mt19937_64 rng(505);
  double conv = 0, err = 0, sm = 0, sum = 0;
  int moved = 0;
  for (int t = 0; t < 200; ++t) {
    const Instance inst = random_instance(rng);
    const AnchorSet& a = inst.anchors;
    const Vector xt = augment(inst.x, a.with_bias);
    const double s = xt.squaredNorm();
    const double lambda = inst.lambda;
    const LocalModel local = fit_local_model(inst.x, inst.y, a, lambda);
    const Matrix& A = a.models[static_cast<std::size_t>(local.anchor)];
    const Matrix W = local.correction + A;

    const Vector pred = W.transpose() * xt;
    const Vector mix = (1 - local.beta) * inst.y + local.beta * (A.transpose() * xt);
    conv = std::max(conv, (pred - mix).norm() / (1.0 + mix.norm()));

    double best = DBL_MAX;
    for (const auto& Al : a.models) best = std::min(best, (inst.y - Al.transpose() * xt).norm());
    err = std::max(err, std::abs((inst.y - pred).norm() - local.beta * best) / (1.0 + best));

    const Index dp = xt.size();
    const Matrix M = lambda * Matrix::Identity(dp, dp) + xt * xt.transpose();
    const Matrix inv = (Matrix::Identity(dp, dp) - xt * xt.transpose() / (lambda + s)) / lambda;
    const Matrix direct = M.fullPivLu().solve(xt * inst.y.transpose() + lambda * A);
    sm = std::max(sm, (M * inv - Matrix::Identity(dp, dp)).cwiseAbs().maxCoeff());
    sm = std::max(sm, (direct - W).cwiseAbs().maxCoeff() / (1.0 + W.cwiseAbs().maxCoeff()));

    const Matrix C = xt * (inst.y - A.transpose() * xt).transpose() / (lambda + s);
    sum = std::max(sum, (C - local.correction).cwiseAbs().maxCoeff() / (1.0 + C.cwiseAbs().maxCoeff()));

    if (fit_local_model(inst.x, inst.y, a, 0.01).anchor != fit_local_model(inst.x, inst.y, a, 100.0).anchor) ++moved;
  }
  const bool ok = conv < 1e-10 && err < 1e-10 && sm < 1e-10 && sum < 1e-10 && moved == 0;
  report(5, ok,
         fmt("200 instances: convex combination %.2g, training error %.2g, rank-one inverse %.2g, "
             "W = C + A %.2g, assignment changes across lambda %d",
             conv, err, sm, sum, moved));
}

// 6. lambda limits ------------------------------------------------------------------

void lambda_limits() {
  std::mt19937_64 rng(606);
  double small = 0.0, large = 0.0, large_abs = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Instance inst = random_instance(rng);
    const AnchorSet& a = inst.anchors;
    const Vector xt = augment(inst.x, a.with_bias);

    const LocalModel tight = fit_local_model(inst.x, inst.y, a, 1e-8);
    const Matrix Wt = tight.correction + a.models[static_cast<std::size_t>(tight.anchor)];
    small = std::max(small, (inst.y - Wt.transpose() * xt).norm() / (1e-6 * (1 + inst.y.norm())));

    // the gap is exactly s * r / (lambda + s), so the bound scales with the anchor prediction
    const LocalModel loose = fit_local_model(inst.x, inst.y, a, 1e8);
    const Matrix& A = a.models[static_cast<std::size_t>(loose.anchor)];
    const Vector anchor_pred = A.transpose() * xt;
    const double gap = ((loose.correction + A).transpose() * xt - anchor_pred).norm();
    large = std::max(large, gap / (1e-6 * (1 + anchor_pred.norm())));
    large_abs = std::max(large_abs, gap);
  }
  report(6, small < 1.0 && large < 1.0,
         fmt("200 instances: lambda=1e-8 error / 1e-6(1+|y|) %.3g; lambda=1e8 gap to anchor prediction "
             "/ 1e-6(1+|A^T x|) %.3g (both < 1; largest absolute gap %.3g)",
             small, large, large_abs));
}

// 7. step function -----------------------------------------------------------------

void step_function() {
  const auto start = Clock::now();
  const SyntheticDataset train = synth_step(200, 0.1, 7);
  const SyntheticDataset test = synth_step(200, 0.1, 8);

  PipelineConfig cfg;
  cfg.method = Method::fall;
  cfg.fall.lambda = 1.0;
  cfg.fall.anchors = 2;
  cfg.fall.anchor_neighbors = 50;
  cfg.fall.pred_neighbors = 5;
  cfg.fall.anchor_method = AnchorMethod::kmeans;
  const FittedPipeline fall_fit = fit_pipeline(train.data, cfg);
  const FallModel& model = std::get<FallModel>(fall_fit.model());

  // anchors carry no label, so score the better of the two matchings
  int agree = 0;
  for (Index i = 0; i < model.size(); ++i) {
    agree += model.locals[static_cast<std::size_t>(i)].anchor == train.group[static_cast<std::size_t>(i)];
  }
  const double recovery = std::max(agree, 200 - agree) / 200.0;

  PipelineConfig ridge = cfg;
  ridge.method = Method::ridge;
  const double fall_mse = mse(test.data.Y, fall_fit.predict(test.data.X));
  const double ridge_mse = mse(test.data.Y, fit_pipeline(train.data, ridge).predict(test.data.X));
  const double secs = seconds_since(start);
  report(7, recovery >= 0.95 && fall_mse <= 0.5 * ridge_mse && secs < 5.0,
         fmt("plateau recovery %.3f (>= 0.95), test MSE fall %.4f vs ridge %.4f (ratio %.3f <= 0.5), %.3f s",
             recovery, fall_mse, ridge_mse, fall_mse / ridge_mse, secs));
}

// 8. two moons ----------------------------------------------------------------------

void two_moons() {
  const SyntheticDataset moons = synth_two_moons(400, 0.1, 11);
  const Split split = train_test_split(moons.data, 0.25, 12);
  PipelineConfig cfg;
  cfg.method = Method::fall;
  cfg.fall.lambda = 1.0;
  cfg.fall.anchors = 20;
  cfg.fall.anchor_neighbors = 20;
  cfg.fall.pred_neighbors = 5;
  const FittedPipeline fitted = fit_pipeline(split.train, cfg);
  const Matrix scores = fitted.predict(split.test.X);
  int correct = 0;
  for (Index i = 0; i < scores.rows(); ++i) {
    correct += argmax_label(scores.row(i).transpose()) == argmax_label(split.test.Y.row(i).transpose());
  }
  const double acc = static_cast<double>(correct) / static_cast<double>(scores.rows());
  report(8, acc >= 0.95, fmt("n=400 (300 train / 100 held out), held-out accuracy %.3f (>= 0.95)", acc));
}

// 9. concrete ------------------------------------------------------------------------

const std::filesystem::path kConcrete = std::filesystem::path(FALL_DATA_DIR) / "concrete.csv";

Dataset concrete() { return load_csv(kConcrete, {"compressive_strength"}); }

void concrete_benchmark() {
  if (!std::filesystem::exists(kConcrete)) {
    report(9, false, "data/concrete.csv not found");
    return;
  }
  const Dataset data = concrete();
  const HyperGrid grid = HyperGrid::desk_default();
  const std::vector<MethodSpec> specs{{"fall", expand_grid(grid, Method::fall)},
                                      {"ridge", expand_grid(grid, Method::ridge)}};
  BenchmarkProtocol proto;
  proto.runs = 10;
  proto.folds = 3;
  proto.seed = 2024;
  proto.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto start = Clock::now();
  const BenchmarkTable table = run_benchmark(data, specs, proto);
  const double bench_secs = seconds_since(start);
  std::ostringstream text;
  write_benchmark_text(text, table);
  std::cout << text.str();

  // single-threaded fit on all 1030 rows with the most frequently chosen setting
  PipelineConfig best;
  for (const auto& c : specs[0].candidates) {
    if (c.describe() == table.rows[0].params) best = c;
  }
  best.threads = 1;
  const auto fit_start = Clock::now();
  const FittedPipeline full = fit_pipeline(data, best);
  const double fit_secs = seconds_since(fit_start);
  (void)full;

  const double ratio = table.rows[0].mse_mean / table.rows[1].mse_mean;
  report(9, ratio < 0.8 && fit_secs < 1.0,
         fmt("10 runs: fall MSE %.2f +- %.2f vs ridge %.2f +- %.2f (ratio %.3f < 0.8); "
             "single-thread fit on n=%lld, d=%lld: %.3f s (< 1 s); benchmark %.1f s",
             table.rows[0].mse_mean, table.rows[0].mse_std, table.rows[1].mse_mean, table.rows[1].mse_std,
             ratio, static_cast<long long>(data.rows()), static_cast<long long>(data.features()), fit_secs,
             bench_secs));
}

// 10. parallel determinism ----------------------------------------------------------

std::string bundle_bytes(const FittedPipeline& p, const Dataset& data) {
  std::ostringstream os(std::ios::binary);
  save_model(os, bundle_from(p, data));
  return os.str();
}

void parallel_determinism() {
  const Dataset data = std::filesystem::exists(kConcrete) ? concrete() : synth_two_moons(1000, 0.1, 3).data;
  PipelineConfig cfg;
  cfg.fall.anchors = 60;
  cfg.fall.anchor_neighbors = 30;
  const int threads = static_cast<int>(std::max(4u, std::thread::hardware_concurrency()));

  cfg.threads = 1;
  const FittedPipeline one = fit_pipeline(data, cfg);
  cfg.threads = threads;
  const FittedPipeline many = fit_pipeline(data, cfg);
  const FallModel& a = std::get<FallModel>(one.model());
  const FallModel& b = std::get<FallModel>(many.model());
  double diff = 0.0;
  for (Index i = 0; i < a.size(); ++i) diff = std::max(diff, (a.full_model(i) - b.full_model(i)).cwiseAbs().maxCoeff());
  for (Index l = 0; l < a.anchors.size(); ++l) {
    const auto sl = static_cast<std::size_t>(l);
    diff = std::max(diff, (a.anchors.points[sl] - b.anchors.points[sl]).cwiseAbs().maxCoeff());
  }
  const bool same_bytes = bundle_bytes(one, data) == bundle_bytes(many, data);
  const Matrix pa = one.predict(data.X);
  const Matrix pb = many.predict(data.X);
  diff = std::max(diff, (pa - pb).cwiseAbs().maxCoeff());
  report(10, diff <= 1e-12 && same_bytes,
         fmt("1 vs %d threads: max elementwise difference %.3g (<= 1e-12), serialized files %s", threads, diff,
             same_bytes ? "byte-identical" : "DIFFER"));
}

// 11. verify subcommand and model round trip -----------------------------------------

void verify_and_round_trip() {
  std::ostringstream out, err;
  const auto start = Clock::now();
  const int code = fall::cli::run({"verify"}, out, err);
  const double secs = seconds_since(start);

  const auto dir = std::filesystem::temp_directory_path() / ("fall_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const SyntheticDataset moons = synth_two_moons(300, 0.1, 5);
  write_csv(dir / "train.csv", moons.data);
  const SyntheticDataset fresh = synth_two_moons(100, 0.1, 6);
  write_csv(dir / "query.csv", fresh.data);

  std::ostringstream fit_out, pred_out, sink;
  int fit_code = fall::cli::run({"fit", "--data", (dir / "train.csv").string(), "--target", "class0,class1", "--k",
                                 "10", "--out", (dir / "m.fall").string()},
                                fit_out, sink);
  int pred_code = fall::cli::run({"predict", "--model", (dir / "m.fall").string(), "--data",
                                  (dir / "query.csv").string(), "--out", (dir / "pred.csv").string()},
                                 pred_out, sink);

  // in-memory fit with the same settings
  PipelineConfig cfg;
  cfg.fall.anchors = 10;
  const FittedPipeline direct = fit_pipeline(moons.data, cfg);
  const Matrix expected = direct.predict(fresh.data.X);
  double diff = DBL_MAX;
  if (fit_code == 0 && pred_code == 0) {
    CsvTable table = read_csv_table(dir / "pred.csv");
    diff = table.values.rows() == expected.rows() ? (table.values - expected).cwiseAbs().maxCoeff() : DBL_MAX;
  }
  std::filesystem::remove_all(dir);

  report(11, code == 0 && diff <= 1e-12,
         fmt("verify (200 instances, 1000 trials) exit %d in %.1f s; fit -> save -> load -> predict max difference %.3g "
             "(<= 1e-12)",
             code, secs, diff));
  if (code != 0) std::cout << out.str() << err.str();
}

}  // namespace

int main() {
  closed_form_optimality();
  gradient_check();
  quadratic_form();
  negative_definite();
  identities();
  lambda_limits();
  step_function();
  two_moons();
  concrete_benchmark();
  parallel_determinism();
  verify_and_round_trip();
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
