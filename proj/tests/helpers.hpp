#pragma once

#include "fall/anchors.hpp"
#include "fall/types.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

namespace fall::test {

inline Matrix normal_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = gauss(rng);
  return M;
}

inline Vector normal_vector(std::mt19937_64& rng, Index size) { return normal_matrix(rng, size, 1).col(0); }

// Anchor models only; points and neighbor sets are placeholders.
inline AnchorSet random_anchors(std::mt19937_64& rng, Index d, Index m, Index k, bool bias) {
  AnchorSet a;
  a.with_bias = bias;
  for (Index l = 0; l < k; ++l) {
    a.models.push_back(normal_matrix(rng, d + (bias ? 1 : 0), m));
    a.points.push_back(Vector::Zero(d));
    a.neighbor_sets.push_back({0});
  }
  return a;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

// Fresh scratch directory per process.
inline std::filesystem::path scratch_dir() {
  static const std::filesystem::path dir = [] {
    auto p = std::filesystem::temp_directory_path() / ("fall_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(p);
    return p;
  }();
  return dir;
}

inline std::filesystem::path scratch(const std::string& name) { return scratch_dir() / name; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace fall::test
