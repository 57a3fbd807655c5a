#include "fall/harness.hpp"
#include "fall/model_io.hpp"
#include "fall/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace fall;

namespace {

Dataset make_dataset(const Matrix& X, const Matrix& Y, std::vector<std::string> features,
                     std::vector<std::string> targets) {
  Dataset d;
  d.X = X;
  d.Y = Y;
  if (features.empty())
    for (Index j = 0; j < X.cols(); ++j) features.push_back("x" + std::to_string(j));
  if (targets.empty())
    for (Index j = 0; j < Y.cols(); ++j) targets.push_back("y" + std::to_string(j));
  d.feature_names = std::move(features);
  d.target_names = std::move(targets);
  d.validate();
  return d;
}

// Y given as a 1-D array arrives as a column vector
Matrix targets_matrix(const py::array_t<double, py::array::forcecast>& Y) {
  if (Y.ndim() == 1) {
    Matrix out(Y.shape(0), 1);
    for (py::ssize_t i = 0; i < Y.shape(0); ++i) out(i, 0) = Y.at(i);
    return out;
  }
  return Y.cast<Matrix>();
}

py::tuple synthetic(const SyntheticDataset& s) {
  return py::make_tuple(s.data.X, s.data.Y, s.group);
}

struct PyModel {
  ModelBundle bundle;

  Matrix predict(const Matrix& X, Index k_pred, int threads) const {
    PredictConfig cfg = bundle.predict;
    if (k_pred > 0) cfg.neighbors = k_pred;
    Matrix Xs = bundle.standardizer ? bundle.standardizer->transform(X) : X;
    Matrix Y = predict_batch(bundle.model, Xs, cfg, threads);
    if (bundle.standardizer) Y = bundle.standardizer->inverse_transform_targets(Y);
    return Y;
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Anchor-regularized local linear models";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  m.def("synth_step", [](Index n, double sigma, std::uint64_t seed) { return synthetic(synth_step(n, sigma, seed)); },
        py::arg("n") = 200, py::arg("sigma") = 0.1, py::arg("seed") = 0,
        "Step function data: returns (X, Y, plateau).");
  m.def("synth_two_moons",
        [](Index n, double sigma, std::uint64_t seed) { return synthetic(synth_two_moons(n, sigma, seed)); },
        py::arg("n") = 400, py::arg("sigma") = 0.1, py::arg("seed") = 0,
        "Two moons with one-hot targets: returns (X, Y, label).");

  m.def(
      "load_csv",
      [](const std::filesystem::path& path, const std::vector<std::string>& targets,
         const std::vector<std::string>& ignore, bool has_header) {
        CsvOptions opts;
        opts.has_header = has_header;
        opts.ignore_columns = ignore;
        const Dataset d = load_csv(path, targets, opts);
        return py::make_tuple(d.X, d.Y, d.feature_names, d.target_names);
      },
      py::arg("path"), py::arg("targets"), py::arg("ignore") = std::vector<std::string>{},
      py::arg("has_header") = true, "Returns (X, Y, feature_names, target_names).");

  py::class_<PyModel>(m, "FallModel")
      .def_static(
          "fit",
          [](const Matrix& X, const py::array_t<double, py::array::forcecast>& Y, double lam, Index k,
             Index anchor_neighbors, double anchor_alpha, Index k_pred, bool with_bias,
             const std::string& anchor_method, bool standardize, std::uint64_t seed, int threads) {
            const Dataset data = make_dataset(X, targets_matrix(Y), {}, {});
            PipelineConfig cfg;
            cfg.fall = {lam, k, anchor_neighbors, k_pred, anchor_alpha, with_bias, parse_anchor_method(anchor_method)};
            cfg.standardize_features = standardize;
            cfg.seed = seed;
            cfg.threads = threads;
            py::gil_scoped_release release;
            return PyModel{bundle_from(fit_pipeline(data, cfg), data)};
          },
          py::arg("X"), py::arg("Y"), py::arg("lam") = 1.0, py::arg("k") = 20, py::arg("anchor_neighbors") = 20,
          py::arg("anchor_alpha") = 1.0, py::arg("k_pred") = 20, py::arg("with_bias") = true,
          py::arg("anchor_method") = "kmeans", py::arg("standardize") = true, py::arg("seed") = 0,
          py::arg("threads") = 1)
      .def_static(
          "load", [](const std::filesystem::path& path) { return PyModel{load_model(path)}; }, py::arg("path"))
      .def(
          "save", [](const PyModel& self, const std::filesystem::path& path) { save_model(path, self.bundle); },
          py::arg("path"))
      .def(
          "predict",
          [](const PyModel& self, const Matrix& X, Index k_pred, int threads) {
            py::gil_scoped_release release;
            return self.predict(X, k_pred, threads);
          },
          py::arg("X"), py::arg("k_pred") = 0, py::arg("threads") = 1,
          "Row-wise predictions; k_pred = 0 keeps the fitted value.")
      .def(
          "predict_class",
          [](const PyModel& self, const Matrix& X, Index k_pred) {
            const Matrix scores = self.predict(X, k_pred, 1);
            std::vector<Index> labels;
            for (Index i = 0; i < scores.rows(); ++i) labels.push_back(argmax_label(scores.row(i).transpose()));
            return labels;
          },
          py::arg("X"), py::arg("k_pred") = 0)
      .def("full_model", [](const PyModel& self, Index i) {
        if (i < 0 || i >= self.bundle.model.size()) throw py::index_error("row out of range");
        return self.bundle.model.full_model(i);
      })
      .def_property_readonly("n", [](const PyModel& s) { return s.bundle.model.size(); })
      .def_property_readonly("d", [](const PyModel& s) { return s.bundle.model.input_dim(); })
      .def_property_readonly("m", [](const PyModel& s) { return s.bundle.model.output_dim(); })
      .def_property_readonly("k", [](const PyModel& s) { return s.bundle.model.anchors.size(); })
      .def_property_readonly("lam", [](const PyModel& s) { return s.bundle.model.lambda; })
      .def_property_readonly("k_pred", [](const PyModel& s) { return s.bundle.predict.neighbors; })
      .def_property_readonly("assignments",
                             [](const PyModel& s) {
                               std::vector<Index> out;
                               for (const auto& l : s.bundle.model.locals) out.push_back(l.anchor);
                               return out;
                             })
      .def_property_readonly("betas",
                             [](const PyModel& s) {
                               Vector out(s.bundle.model.size());
                               for (Index i = 0; i < out.size(); ++i) out(i) = s.bundle.model.locals[static_cast<std::size_t>(i)].beta;
                               return out;
                             })
      .def_property_readonly("residuals",
                             [](const PyModel& s) {
                               Vector out(s.bundle.model.size());
                               for (Index i = 0; i < out.size(); ++i)
                                 out(i) = s.bundle.model.locals[static_cast<std::size_t>(i)].residual_norm;
                               return out;
                             })
      .def_property_readonly("anchor_models", [](const PyModel& s) { return s.bundle.model.anchors.models; })
      .def_property_readonly("anchor_points", [](const PyModel& s) { return s.bundle.model.anchors.points; })
      .def("__repr__", [](const PyModel& s) {
        const FallModel& f = s.bundle.model;
        return "<FallModel n=" + std::to_string(f.size()) + " d=" + std::to_string(f.input_dim()) +
               " m=" + std::to_string(f.output_dim()) + " k=" + std::to_string(f.anchors.size()) + ">";
      });

  m.def(
      "local_model",
      [](const Vector& x, const Vector& y, const std::vector<Matrix>& anchors, double lam, bool with_bias) {
        AnchorSet a;
        a.with_bias = with_bias;
        a.models = anchors;
        a.points.assign(anchors.size(), Vector::Zero(x.size()));
        a.neighbor_sets.assign(anchors.size(), IndexList{0});
        a.validate();
        const LocalModel l = fit_local_model(x, y, a, lam);
        py::dict out;
        out["anchor"] = l.anchor;
        out["beta"] = l.beta;
        out["correction"] = l.correction;
        out["residual_norm"] = l.residual_norm;
        out["W"] = Matrix(l.correction + anchors[static_cast<std::size_t>(l.anchor)]);
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("anchors"), py::arg("lam"), py::arg("with_bias") = true,
      "Closed-form per-sample model against a list of d' x m anchor matrices.");

  m.def(
      "build_qp",
      [](const Vector& x, const Vector& y, const std::vector<Matrix>& anchors, double lam, bool with_bias) {
        AnchorSet a;
        a.with_bias = with_bias;
        a.models = anchors;
        a.points.assign(anchors.size(), Vector::Zero(x.size()));
        a.neighbor_sets.assign(anchors.size(), IndexList{0});
        a.validate();
        const QpForm qp = build_qp(x, y, a, lam);
        return py::make_tuple(qp.H, qp.b, qp.constant);
      },
      py::arg("x"), py::arg("y"), py::arg("anchors"), py::arg("lam"), py::arg("with_bias") = true,
      "Returns (H, b, constant) of the quadratic form in the simplex weights.");

  m.def(
      "ridge_fit",
      [](const Matrix& X, const py::array_t<double, py::array::forcecast>& Y, double alpha, bool with_bias) {
        return ridge_fit(make_dataset(X, targets_matrix(Y), {}, {}), alpha, with_bias).W;
      },
      py::arg("X"), py::arg("Y"), py::arg("alpha") = 1.0, py::arg("with_bias") = true);

  m.def(
      "knn_predict",
      [](const Matrix& X_train, const py::array_t<double, py::array::forcecast>& Y_train, const Matrix& X,
         Index k, const std::string& weighting) {
        const KnnModel model =
            knn_fit(make_dataset(X_train, targets_matrix(Y_train), {}, {}), k, parse_knn_weighting(weighting));
        return knn_predict_batch(model, X);
      },
      py::arg("X_train"), py::arg("Y_train"), py::arg("X"), py::arg("k") = 5, py::arg("weighting") = "uniform");

  m.def(
      "kmeans",
      [](const Matrix& X, Index k, std::uint64_t seed) {
        const KMeansResult r = kmeans(X, k, seed);
        return py::make_tuple(r.centers, r.labels, r.objective_trace);
      },
      py::arg("X"), py::arg("k"), py::arg("seed") = 0, "Returns (centers, labels, objective_trace).");

  m.def(
      "benchmark",
      [](const Matrix& X, const py::array_t<double, py::array::forcecast>& Y, const std::vector<std::string>& methods,
         int runs, int folds, double test_fraction, std::uint64_t seed, int threads) {
        const Dataset data = make_dataset(X, targets_matrix(Y), {}, {});
        const HyperGrid grid = HyperGrid::desk_default();
        std::vector<MethodSpec> specs;
        for (const auto& name : methods) {
          const Method method = parse_method(name);
          specs.push_back({std::string(to_string(method)), expand_grid(grid, method)});
        }
        BenchmarkTable table;
        {
          py::gil_scoped_release release;
          table = run_benchmark(data, specs, {runs, test_fraction, folds, seed, threads});
        }
        py::list rows;
        for (const auto& r : table.rows) {
          py::dict row;
          row["method"] = r.method;
          row["mse_mean"] = r.mse_mean;
          row["mse_std"] = r.mse_std;
          row["fit_time_mean"] = r.fit_time_mean;
          row["predict_time_mean"] = r.predict_time_mean;
          row["params"] = r.params;
          row["run_mse"] = r.run_mse;
          rows.append(row);
        }
        return rows;
      },
      py::arg("X"), py::arg("Y"), py::arg("methods") = std::vector<std::string>{"fall", "ridge"},
      py::arg("runs") = 10, py::arg("folds") = 3, py::arg("test_fraction") = 0.1, py::arg("seed") = 0,
      py::arg("threads") = 1, "Repeated-split benchmark over the default hyperparameter grid.");

  m.def(
      "verify",
      [](Index instances, Index trials, std::uint64_t seed) {
        VerifyConfig cfg;
        cfg.instances = instances;
        cfg.trials = trials;
        cfg.seed = seed;
        VerifySummary s;
        {
          py::gil_scoped_release release;
          s = run_verification(cfg);
        }
        py::dict out;
        out["passed"] = s.passed();
        out["worst_vertex_violation"] = s.worst_vertex_violation;
        out["worst_qp_error"] = s.worst_qp_error;
        out["max_eigenvalue_ratio"] = s.max_eigenvalue_ratio;
        out["report"] = s.describe();
        return out;
      },
      py::arg("instances") = 200, py::arg("trials") = 1000, py::arg("seed") = 0);
}
