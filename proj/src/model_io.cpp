#include "fall/model_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace fall {

namespace {

constexpr const char* kMagic = "FALLMODEL";

std::string real_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xffU);
  out.write(bytes, 8);
}

template <typename T>
T get_le(std::istream& in) {
  static_assert(sizeof(T) == 8);
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw DataError("model file payload is truncated");
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

// row-major regardless of Eigen's storage order
void put_matrix(std::ostream& out, const Matrix& M) {
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) put_le(out, M(i, j));
}

Matrix get_matrix(std::istream& in, Index rows, Index cols) {
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = get_le<double>(in);
  return M;
}

void put_vector(std::ostream& out, const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) put_le(out, v(i));
}

Vector get_vector(std::istream& in, Index size) {
  Vector v(size);
  for (Index i = 0; i < size; ++i) v(i) = get_le<double>(in);
  return v;
}

class HeaderReader {
 public:
  explicit HeaderReader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string text;
    if (!std::getline(in_, text)) throw DataError("model file header is truncated");
    return text;
  }

  // "key value" with the expected key
  std::string value(const std::string& key) {
    const std::string text = line();
    const auto space = text.find(' ');
    if (text.substr(0, space) != key) {
      throw DataError("model file: expected '" + key + "', found '" + text + "'");
    }
    return space == std::string::npos ? std::string() : text.substr(space + 1);
  }

  long long integer(const std::string& key) {
    const std::string v = value(key);
    try {
      std::size_t used = 0;
      const long long out = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw DataError("model file: bad integer for '" + key + "'");
    }
  }

  double real(const std::string& key) {
    const std::string v = value(key);
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0') throw DataError("model file: bad number for '" + key + "'");
    return out;
  }

  std::vector<std::string> names(const std::string& key) {
    const long long count = integer(key);
    if (count < 0) throw DataError("model file: negative name count");
    std::vector<std::string> out;
    for (long long i = 0; i < count; ++i) out.push_back(line());
    return out;
  }

 private:
  std::istream& in_;
};

}  // namespace

ModelBundle bundle_from(const FittedPipeline& fitted, const Dataset& train) {
  const auto* model = std::get_if<FallModel>(&fitted.model());
  if (model == nullptr) throw std::invalid_argument("only FALL pipelines can be saved as model files");
  ModelBundle b;
  b.model = *model;
  b.predict.neighbors = fitted.config().fall.pred_neighbors;
  b.standardizer = fitted.standardizer();
  b.feature_names = train.feature_names;
  b.target_names = train.target_names;
  return b;
}

void save_model(std::ostream& out, const ModelBundle& bundle) {
  const FallModel& model = bundle.model;
  model.validate();
  const Index n = model.size();
  const Index d = model.input_dim();
  const Index dp = model.anchors.model_rows();
  const Index m = model.output_dim();
  const Index k = model.anchors.size();

  std::ostringstream header;
  header << kMagic << ' ' << kModelFormatVersion << '\n'
         << "lambda " << real_text(model.lambda) << '\n'
         << "with_bias " << (model.with_bias ? 1 : 0) << '\n'
         << "n " << n << '\n'
         << "d " << d << '\n'
         << "m " << m << '\n'
         << "k " << k << '\n'
         << "anchor_ridge_alpha " << real_text(model.anchors.ridge_alpha) << '\n'
         << "k_pred " << bundle.predict.neighbors << '\n'
         << "exact_match_epsilon " << real_text(bundle.predict.exact_match_epsilon) << '\n'
         << "standardizer " << (bundle.standardizer ? 1 : 0) << '\n'
         << "standardized_targets "
         << (bundle.standardizer && bundle.standardizer->applied_to_targets ? 1 : 0) << '\n';
  header << "feature_names " << bundle.feature_names.size() << '\n';
  for (const auto& name : bundle.feature_names) header << name << '\n';
  header << "target_names " << bundle.target_names.size() << '\n';
  for (const auto& name : bundle.target_names) header << name << '\n';
  header << "neighbor_set_sizes";
  Index neighbor_total = 0;
  for (const auto& s : model.anchors.neighbor_sets) {
    header << ' ' << s.size();
    neighbor_total += static_cast<Index>(s.size());
  }
  header << '\n';

  Index doubles = k * dp * m + k * d + 2 * n + n * dp * m + n * d;
  if (bundle.standardizer) doubles += 2 * d + 2 * m;
  header << "float64_layout anchor_models[k][d'][m] anchor_points[k][d] beta[n] residual_norm[n] "
            "correction[n][d'][m] train_x[n][d]"
         << (bundle.standardizer ? " mean[d] std[d] target_mean[m] target_std[m]" : "") << '\n'
         << "float64_count " << doubles << '\n'
         << "int64_layout assignment[n] neighbor_sets[sum]\n"
         << "int64_count " << n + neighbor_total << '\n'
         << "end_header\n";
  out << header.str();

  for (const auto& A : model.anchors.models) put_matrix(out, A);
  for (const auto& p : model.anchors.points) put_vector(out, p);
  for (const auto& local : model.locals) put_le(out, local.beta);
  for (const auto& local : model.locals) put_le(out, local.residual_norm);
  for (const auto& local : model.locals) put_matrix(out, local.correction);
  put_matrix(out, model.train_X);
  if (bundle.standardizer) {
    put_vector(out, bundle.standardizer->mean);
    put_vector(out, bundle.standardizer->std);
    put_vector(out, bundle.standardizer->target_mean);
    put_vector(out, bundle.standardizer->target_std);
  }
  for (const auto& local : model.locals) put_le(out, static_cast<std::int64_t>(local.anchor));
  for (const auto& s : model.anchors.neighbor_sets)
    for (const Index j : s) put_le(out, static_cast<std::int64_t>(j));
  if (!out) throw DataError("failed writing model");
}

void save_model(const std::filesystem::path& path, const ModelBundle& bundle) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file '" + path.string() + "'");
  save_model(out, bundle);
}

ModelBundle load_model(std::istream& in) {
  HeaderReader h(in);
  const std::string magic = h.line();
  if (magic != std::string(kMagic) + ' ' + std::to_string(kModelFormatVersion)) {
    throw DataError("not a model file (header '" + magic.substr(0, 40) + "')");
  }

  ModelBundle bundle;
  FallModel& model = bundle.model;
  model.lambda = h.real("lambda");
  model.with_bias = h.integer("with_bias") != 0;
  const Index n = h.integer("n");
  const Index d = h.integer("d");
  const Index m = h.integer("m");
  const Index k = h.integer("k");
  if (n < 1 || d < 1 || m < 1 || k < 1) throw DataError("model file has empty dimensions");
  const Index dp = d + (model.with_bias ? 1 : 0);
  model.anchors.with_bias = model.with_bias;
  model.anchors.ridge_alpha = h.real("anchor_ridge_alpha");
  bundle.predict.neighbors = h.integer("k_pred");
  bundle.predict.exact_match_epsilon = h.real("exact_match_epsilon");
  const bool has_standardizer = h.integer("standardizer") != 0;
  const bool std_targets = h.integer("standardized_targets") != 0;
  bundle.feature_names = h.names("feature_names");
  bundle.target_names = h.names("target_names");

  std::istringstream sizes(h.value("neighbor_set_sizes"));
  std::vector<Index> set_sizes;
  for (Index s; sizes >> s;) set_sizes.push_back(s);
  if (static_cast<Index>(set_sizes.size()) != k) throw DataError("model file: neighbor set count mismatch");
  h.value("float64_layout");
  h.integer("float64_count");
  h.value("int64_layout");
  h.integer("int64_count");
  if (h.line() != "end_header") throw DataError("model file: missing end_header");

  for (Index l = 0; l < k; ++l) model.anchors.models.push_back(get_matrix(in, dp, m));
  for (Index l = 0; l < k; ++l) model.anchors.points.push_back(get_vector(in, d));
  model.locals.resize(static_cast<std::size_t>(n));
  for (auto& local : model.locals) local.beta = get_le<double>(in);
  for (auto& local : model.locals) local.residual_norm = get_le<double>(in);
  for (auto& local : model.locals) local.correction = get_matrix(in, dp, m);
  model.train_X = get_matrix(in, n, d);
  if (has_standardizer) {
    Standardizer s;
    s.applied_to_targets = std_targets;
    s.mean = get_vector(in, d);
    s.std = get_vector(in, d);
    s.target_mean = get_vector(in, m);
    s.target_std = get_vector(in, m);
    bundle.standardizer = std::move(s);
  }
  for (auto& local : model.locals) local.anchor = static_cast<Index>(get_le<std::int64_t>(in));
  for (const Index size : set_sizes) {
    IndexList rows;
    for (Index j = 0; j < size; ++j) rows.push_back(static_cast<Index>(get_le<std::int64_t>(in)));
    model.anchors.neighbor_sets.push_back(std::move(rows));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("model file has trailing bytes");

  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model file is inconsistent: ") + e.what());
  }
  return bundle;
}

ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path.string() + "'");
  return load_model(in);
}

}  // namespace fall
