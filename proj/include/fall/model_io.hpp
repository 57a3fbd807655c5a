#pragma once

#include "fall/core.hpp"
#include "fall/dataset.hpp"
#include "fall/harness.hpp"
#include "fall/predict.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fall {

/// Everything the command-line tools need to predict from a fitted model.
struct ModelBundle {
  FallModel model;
  PredictConfig predict;
  std::optional<Standardizer> standardizer;
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;
};

/// Packages a fitted FALL pipeline with the column names of its training data.
/// Throws std::invalid_argument for ridge or KNN pipelines.
ModelBundle bundle_from(const FittedPipeline& fitted, const Dataset& train);

inline constexpr int kModelFormatVersion = 1;

// File layout: a text header of "key value" lines terminated by "end_header",
// followed by a little-endian binary payload of float64 values and int64
// indices in the order the header lists them. Reals in the header are
// written with 17 significant digits so they round-trip exactly.
void save_model(std::ostream& out, const ModelBundle& bundle);
void save_model(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_model(std::istream& in);
ModelBundle load_model(const std::filesystem::path& path);

}  // namespace fall
