#include "fall/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

namespace fall {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_double(std::string_view text, double& value) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

void append_number(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

// Dataset ----------------------------------------------------------------------

Dataset Dataset::subset(const IndexList& rows) const {
  Dataset out;
  out.X.resize(static_cast<Index>(rows.size()), X.cols());
  out.Y.resize(static_cast<Index>(rows.size()), Y.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index src = rows[r];
    if (src < 0 || src >= X.rows()) throw std::out_of_range("subset row out of range");
    out.X.row(static_cast<Index>(r)) = X.row(src);
    out.Y.row(static_cast<Index>(r)) = Y.row(src);
  }
  out.feature_names = feature_names;
  out.target_names = target_names;
  return out;
}

void Dataset::validate() const {
  if (X.rows() < 1) throw DataError("dataset has no rows");
  if (X.rows() != Y.rows()) {
    throw DataError("X has " + std::to_string(X.rows()) + " rows but Y has " +
                    std::to_string(Y.rows()));
  }
  if (!X.allFinite() || !Y.allFinite()) throw DataError("dataset contains NaN or Inf");
  if (static_cast<Index>(feature_names.size()) != X.cols() ||
      static_cast<Index>(target_names.size()) != Y.cols()) {
    throw DataError("column names do not match matrix shapes");
  }
}

// CSV --------------------------------------------------------------------------

CsvTable read_csv_table(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");

  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (header_pending) {
      for (const auto f : fields) table.columns.emplace_back(f);
      header_pending = false;
      continue;
    }
    if (table.columns.empty()) {
      for (std::size_t c = 0; c < fields.size(); ++c) table.columns.push_back(std::to_string(c));
    }
    if (fields.size() != table.columns.size()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(table.columns.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    std::vector<double> values(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_double(fields[c], values[c])) {
        throw DataError(path.string() + ": row " + std::to_string(line_no) + ", column '" +
                        table.columns[c] + "': non-numeric value '" + std::string(fields[c]) +
                        "'");
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw DataError("'" + path.string() + "' contains no data rows");

  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      table.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    }
  }
  return table;
}

Dataset load_csv(const std::filesystem::path& path, const std::vector<std::string>& target_columns,
                 const CsvOptions& options) {
  if (target_columns.empty()) throw DataError("no target column given");
  if (!std::filesystem::exists(path)) throw DataError("file not found: '" + path.string() + "'");

  std::unordered_map<std::string, Index> position;
  const CsvTable table = read_csv_table(path, options.has_header);
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    position.emplace(table.columns[c], static_cast<Index>(c));
  }

  std::vector<bool> used(table.columns.size(), false);
  IndexList target_idx;
  for (const auto& name : target_columns) {
    const auto it = position.find(name);
    if (it == position.end()) throw DataError("unknown target column '" + name + "'");
    target_idx.push_back(it->second);
    used[static_cast<std::size_t>(it->second)] = true;
  }
  for (const auto& name : options.ignore_columns) {
    const auto it = position.find(name);
    if (it == position.end()) throw DataError("unknown ignored column '" + name + "'");
    used[static_cast<std::size_t>(it->second)] = true;
  }
  IndexList feature_idx;
  for (std::size_t c = 0; c < used.size(); ++c) {
    if (!used[c]) feature_idx.push_back(static_cast<Index>(c));
  }

  Dataset data;
  data.X = table.values(Eigen::all, feature_idx);
  data.Y = table.values(Eigen::all, target_idx);
  for (const Index c : feature_idx) data.feature_names.push_back(table.columns[static_cast<std::size_t>(c)]);
  for (const Index c : target_idx) data.target_names.push_back(table.columns[static_cast<std::size_t>(c)]);
  data.validate();
  return data;
}

void write_csv(std::ostream& out, const Dataset& data, const std::vector<int>* group,
               const std::string& group_name) {
  std::string line;
  auto flush_line = [&] {
    line.push_back('\n');
    out << line;
    line.clear();
  };
  bool first = true;
  auto sep = [&] {
    if (!first) line.push_back(',');
    first = false;
  };
  for (const auto& n : data.feature_names) { sep(); line += n; }
  for (const auto& n : data.target_names) { sep(); line += n; }
  if (group) { sep(); line += group_name; }
  flush_line();

  for (Index r = 0; r < data.rows(); ++r) {
    first = true;
    for (Index c = 0; c < data.X.cols(); ++c) { sep(); append_number(line, data.X(r, c)); }
    for (Index c = 0; c < data.Y.cols(); ++c) { sep(); append_number(line, data.Y(r, c)); }
    if (group) { sep(); line += std::to_string((*group)[static_cast<std::size_t>(r)]); }
    flush_line();
  }
}

void write_csv(const std::filesystem::path& path, const Dataset& data,
               const std::vector<int>* group, const std::string& group_name) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_csv(out, data, group, group_name);
}

// Standardizer -----------------------------------------------------------------

namespace {

void column_stats(const Matrix& M, Vector& mean, Vector& std) {
  const double n = static_cast<double>(M.rows());
  mean = M.colwise().mean().transpose();
  std.resize(M.cols());
  for (Index c = 0; c < M.cols(); ++c) {
    const double var = (M.col(c).array() - mean(c)).square().sum() / n;
    std(c) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
}

}  // namespace

Standardizer fit_standardizer(const Dataset& data, bool standardize_targets) {
  if (data.rows() < 1) throw DataError("cannot standardize an empty dataset");
  Standardizer s;
  column_stats(data.X, s.mean, s.std);
  s.applied_to_targets = standardize_targets;
  if (standardize_targets) {
    column_stats(data.Y, s.target_mean, s.target_std);
  } else {
    s.target_mean = Vector::Zero(data.targets());
    s.target_std = Vector::Ones(data.targets());
  }
  return s;
}

Matrix Standardizer::transform(const Matrix& X) const {
  if (X.cols() != mean.size()) throw std::invalid_argument("standardizer: column count mismatch");
  return (X.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
}

Matrix Standardizer::inverse_transform(const Matrix& X) const {
  if (X.cols() != mean.size()) throw std::invalid_argument("standardizer: column count mismatch");
  return (X.array().rowwise() * std.transpose().array()).rowwise() + mean.transpose().array();
}

Matrix Standardizer::transform_targets(const Matrix& Y) const {
  if (!applied_to_targets) return Y;
  return (Y.rowwise() - target_mean.transpose()).array().rowwise() / target_std.transpose().array();
}

Matrix Standardizer::inverse_transform_targets(const Matrix& Y) const {
  if (!applied_to_targets) return Y;
  return (Y.array().rowwise() * target_std.transpose().array()).rowwise() +
         target_mean.transpose().array();
}

Dataset Standardizer::transform(const Dataset& data) const {
  Dataset out = data;
  out.X = transform(data.X);
  out.Y = transform_targets(data.Y);
  return out;
}

// Splitting --------------------------------------------------------------------

Split train_test_split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie in (0, 1)");
  }
  const Index n = data.rows();
  // the epsilon absorbs products such as 0.29 * 100 = 28.999999999999996
  const auto n_test = static_cast<Index>(std::floor(static_cast<double>(n) * test_fraction + 1e-9));
  if (n_test < 1 || n_test >= n) {
    throw std::invalid_argument("test_fraction " + std::to_string(test_fraction) + " on " +
                                std::to_string(n) + " rows leaves an empty side");
  }

  IndexList order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Split split;
  split.test_rows.assign(order.begin(), order.begin() + n_test);
  split.train_rows.assign(order.begin() + n_test, order.end());
  split.train = data.subset(split.train_rows);
  split.test = data.subset(split.test_rows);
  return split;
}

std::uint64_t hash_rows(const IndexList& rows) {
  // FNV-1a over the little-endian bytes of each index
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Index r : rows) {
    auto v = static_cast<std::uint64_t>(r);
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

// Synthetic data ---------------------------------------------------------------

SyntheticDataset synth_step(Index n, double noise_sigma, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("synth_step needs n >= 2");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be >= 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  SyntheticDataset out;
  out.data.X.resize(n, 1);
  out.data.Y.resize(n, 1);
  out.group.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double x = uniform(rng);
    const int plateau = x < 0.0 ? 0 : 1;
    const double eps = noise(rng);
    out.data.X(i, 0) = x;
    out.data.Y(i, 0) = static_cast<double>(plateau) + (noise_sigma > 0.0 ? noise_sigma * eps : 0.0);
    out.group[static_cast<std::size_t>(i)] = plateau;
  }
  out.data.feature_names = {"x"};
  out.data.target_names = {"y"};
  return out;
}

SyntheticDataset synth_two_moons(Index n, double noise_sigma, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("synth_two_moons needs n >= 2");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be >= 0");

  const Index n_outer = n / 2;
  const Index n_inner = n - n_outer;
  constexpr double pi = std::numbers::pi;

  Matrix X(n, 2);
  std::vector<int> cls(static_cast<std::size_t>(n));
  for (Index i = 0; i < n_outer; ++i) {
    const double t = n_outer > 1 ? pi * static_cast<double>(i) / static_cast<double>(n_outer - 1) : 0.0;
    X(i, 0) = std::cos(t);
    X(i, 1) = std::sin(t);
    cls[static_cast<std::size_t>(i)] = 0;
  }
  for (Index i = 0; i < n_inner; ++i) {
    const double t = n_inner > 1 ? pi * static_cast<double>(i) / static_cast<double>(n_inner - 1) : 0.0;
    X(n_outer + i, 0) = 1.0 - std::cos(t);
    X(n_outer + i, 1) = 0.5 - std::sin(t);
    cls[static_cast<std::size_t>(n_outer + i)] = 1;
  }

  std::mt19937_64 rng(seed);
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (Index i = 0; i < n; ++i) {
      X(i, 0) += noise(rng);
      X(i, 1) += noise(rng);
    }
  }
  IndexList order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  SyntheticDataset out;
  out.data.X.resize(n, 2);
  out.data.Y = Matrix::Zero(n, 2);
  out.group.resize(static_cast<std::size_t>(n));
  for (Index r = 0; r < n; ++r) {
    const Index src = order[static_cast<std::size_t>(r)];
    out.data.X.row(r) = X.row(src);
    const int c = cls[static_cast<std::size_t>(src)];
    out.data.Y(r, c) = 1.0;
    out.group[static_cast<std::size_t>(r)] = c;
  }
  out.data.feature_names = {"x1", "x2"};
  out.data.target_names = {"class0", "class1"};
  return out;
}

}  // namespace fall
