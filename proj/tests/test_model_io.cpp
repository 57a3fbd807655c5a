#include "fall/model_io.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <sstream>

using namespace fall;
using fall::test::normal_matrix;

namespace {

ModelBundle make_bundle(bool bias, bool standardize) {
  std::mt19937_64 rng(bias ? 1 : 2);
  Dataset data;
  data.X = normal_matrix(rng, 50, 3);
  data.Y = normal_matrix(rng, 50, 2);
  data.feature_names = {"a", "b c", "d"};
  data.target_names = {"u", "v"};
  ModelBundle b;
  if (standardize) {
    b.standardizer = fit_standardizer(data, true);
    data = b.standardizer->transform(data);
  }
  AnchorConfig cfg;
  cfg.count = 4;
  cfg.neighbors = 12;
  cfg.with_bias = bias;
  cfg.ridge_alpha = 0.3;
  b.model = fit(data, build_anchor_set(data, cfg), 0.1 + 1.0 / 3.0);
  b.predict.neighbors = 7;
  b.feature_names = data.feature_names;
  b.target_names = data.target_names;
  return b;
}

std::string serialize(const ModelBundle& b) {
  std::ostringstream os(std::ios::binary);
  save_model(os, b);
  return os.str();
}

}  // namespace

TEST_SUITE("model_io") {

TEST_CASE("save, load, save is byte-identical and predictions match") {
  for (const bool bias : {true, false}) {
    for (const bool standardize : {true, false}) {
      const ModelBundle b = make_bundle(bias, standardize);
      const std::string bytes = serialize(b);
      std::istringstream is(bytes, std::ios::binary);
      const ModelBundle back = load_model(is);
      CHECK(serialize(back) == bytes);
      CHECK(back.model.lambda == b.model.lambda);
      CHECK(back.model.anchors.ridge_alpha == b.model.anchors.ridge_alpha);
      CHECK(back.predict.neighbors == 7);
      CHECK(back.feature_names == b.feature_names);
      CHECK(back.standardizer.has_value() == standardize);
      if (standardize) CHECK(back.standardizer->applied_to_targets);

      std::mt19937_64 rng(9);
      const Matrix Q = normal_matrix(rng, 20, 3);
      CHECK(predict_batch(back.model, Q, back.predict) == predict_batch(b.model, Q, b.predict));
      for (Index i = 0; i < b.model.size(); ++i) {
        CHECK(back.model.locals[static_cast<std::size_t>(i)].anchor == b.model.locals[static_cast<std::size_t>(i)].anchor);
      }
    }
  }
}

TEST_CASE("file round trip") {
  const ModelBundle b = make_bundle(true, false);
  const auto path = fall::test::scratch("model.fall");
  save_model(path, b);
  CHECK(fall::test::read_file(path) == serialize(b));
  const ModelBundle back = load_model(path);
  CHECK(back.model.train_X == b.model.train_X);
  CHECK_THROWS_AS(load_model(fall::test::scratch("absent.fall")), DataError);
}

TEST_CASE("corrupt files are rejected") {
  const std::string bytes = serialize(make_bundle(true, true));
  auto load = [](const std::string& s) {
    std::istringstream is(s, std::ios::binary);
    return load_model(is);
  };
  CHECK_THROWS_AS(load(bytes.substr(0, bytes.size() - 3)), DataError);
  CHECK_THROWS_AS(load(bytes + "x"), DataError);
  CHECK_THROWS_AS(load("FALLMODEL 2\n" + bytes.substr(bytes.find('\n') + 1)), DataError);
  CHECK_THROWS_AS(load("hello\n"), DataError);
  CHECK_THROWS_AS(load(""), DataError);

  // an out-of-range anchor index in the payload
  std::string broken = bytes;
  const ModelBundle b = make_bundle(true, true);
  std::size_t neighbor_total = 0;
  for (const auto& s : b.model.anchors.neighbor_sets) neighbor_total += s.size();
  const std::size_t first_assignment = bytes.size() - 8 * (neighbor_total + static_cast<std::size_t>(b.model.size()));
  broken[first_assignment] = 99;
  CHECK_THROWS_AS(load(broken), DataError);
}

}
