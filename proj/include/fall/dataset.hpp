#pragma once

#include "fall/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace fall {

/// Raised for malformed or unreadable input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// n samples of d inputs and m outputs. Immutable once built; every
/// operation returning a Dataset checks the shape and finiteness invariants.
struct Dataset {
  Matrix X;  // n x d
  Matrix Y;  // n x m
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;

  Index rows() const { return X.rows(); }
  Index features() const { return X.cols(); }
  Index targets() const { return Y.cols(); }

  /// Rows in the given order.
  Dataset subset(const IndexList& rows) const;

  /// Throws DataError when the invariants do not hold.
  void validate() const;
};

/// Dataset plus the generator's ground-truth group of every row
/// (plateau for the step function, class for the two moons).
struct SyntheticDataset {
  Dataset data;
  std::vector<int> group;
};

// CSV ------------------------------------------------------------------------

struct CsvOptions {
  bool has_header = true;
  /// Columns excluded from both X and Y (e.g. generator metadata).
  std::vector<std::string> ignore_columns;
};

/// Reads a comma-separated file. Target columns become Y in the order given,
/// the remaining non-ignored columns become X in file order. Without a header
/// columns are named by their zero-based position ("0", "1", ...).
Dataset load_csv(const std::filesystem::path& path,
                 const std::vector<std::string>& target_columns,
                 const CsvOptions& options = {});

/// Raw numeric table used by prediction inputs: every column is parsed.
struct CsvTable {
  std::vector<std::string> columns;
  Matrix values;
};
CsvTable read_csv_table(const std::filesystem::path& path, bool has_header = true);

/// Writes features then targets, plus an optional integer metadata column.
void write_csv(const std::filesystem::path& path, const Dataset& data,
               const std::vector<int>* group = nullptr,
               const std::string& group_name = "group");
void write_csv(std::ostream& out, const Dataset& data,
               const std::vector<int>* group = nullptr,
               const std::string& group_name = "group");

// Standardization ------------------------------------------------------------

struct Standardizer {
  Vector mean;
  Vector std;
  bool applied_to_targets = false;
  Vector target_mean;
  Vector target_std;

  Matrix transform(const Matrix& X) const;
  Matrix inverse_transform(const Matrix& X) const;
  Matrix transform_targets(const Matrix& Y) const;
  Matrix inverse_transform_targets(const Matrix& Y) const;
  Dataset transform(const Dataset& data) const;
};

/// Population mean/std per column; constant columns get std = 1.
Standardizer fit_standardizer(const Dataset& data, bool standardize_targets = false);

// Splitting ------------------------------------------------------------------

struct Split {
  Dataset train;
  Dataset test;
  IndexList train_rows;
  IndexList test_rows;
};

/// Seeded shuffle, then floor(n * test_fraction) rows go to the test side.
Split train_test_split(const Dataset& data, double test_fraction, std::uint64_t seed);

/// Stable 64-bit fingerprint of a row-index list.
std::uint64_t hash_rows(const IndexList& rows);

// Synthetic data -------------------------------------------------------------

/// x ~ U[-1, 1]; y = 0 for x < 0 and 1 otherwise, plus N(0, sigma^2) noise.
/// group holds the plateau (0 or 1).
SyntheticDataset synth_step(Index n, double noise_sigma, std::uint64_t seed);

/// Two interleaved half circles. Y is the one-hot class encoding; the first
/// n/2 points (outer moon) are class 0. Rows are shuffled with the seed.
SyntheticDataset synth_two_moons(Index n, double noise_sigma, std::uint64_t seed);

}  // namespace fall
