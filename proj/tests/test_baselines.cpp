#include "fall/baselines.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace fall;
using fall::test::normal_matrix;

namespace {

Dataset make_data(const Matrix& X, const Matrix& Y) {
  Dataset d;
  d.X = X;
  d.Y = Y;
  for (Index j = 0; j < X.cols(); ++j) d.feature_names.push_back("x" + std::to_string(j));
  for (Index j = 0; j < Y.cols(); ++j) d.target_names.push_back("y" + std::to_string(j));
  return d;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("ridge recovers a noiseless linear map as alpha shrinks") {
  std::mt19937_64 rng(1);
  const Matrix X = normal_matrix(rng, 200, 3);
  Matrix W(4, 2);
  W << 1, -2, 0.5, 3, -1, 0, 2, 1;
  Matrix Xt(200, 4);
  Xt << X, Matrix::Ones(200, 1);
  const RidgeModel r = ridge_fit(make_data(X, Xt * W), 1e-10, true);
  CHECK((r.W - W).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((r.predict_batch(X) - Xt * W).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((r.predict(X.row(3).transpose()) - r.predict_batch(X).row(3).transpose()).norm() < 1e-12);
}

TEST_CASE("ridge shrinkage on one scalar sample") {
  const RidgeModel r = ridge_fit(make_data(Matrix::Ones(1, 1), Matrix::Constant(1, 1, 2.0)), 1.0, false);
  CHECK(r.W(0, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(r.predict_batch(Matrix::Ones(1, 2)), std::invalid_argument);
}

TEST_CASE("knn weighting") {
  Matrix X(3, 1), Y(3, 1);
  X << 1, -3, 10;
  Y << 0, 1, 7;
  const Dataset d = make_data(X, Y);
  const KnnModel inv = knn_fit(d, 2, KnnWeighting::inverse_distance);
  CHECK(knn_predict(inv, Vector::Zero(1))(0) == doctest::Approx(0.25));
  const KnnModel uni = knn_fit(d, 2, KnnWeighting::uniform);
  CHECK(knn_predict(uni, Vector::Zero(1))(0) == doctest::Approx(0.5));
  // an exact training match returns its own target
  CHECK(knn_predict(inv, Vector::Constant(1, 10.0))(0) == 7.0);
  CHECK(knn_predict_batch(uni, X)(0, 0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(knn_fit(d, 4, KnnWeighting::uniform), std::invalid_argument);
  CHECK_THROWS_AS(knn_fit(d, 0, KnnWeighting::uniform), std::invalid_argument);
}

TEST_CASE("knn weighting names") {
  CHECK(parse_knn_weighting("uniform") == KnnWeighting::uniform);
  CHECK(parse_knn_weighting("distance") == KnnWeighting::inverse_distance);
  CHECK(parse_knn_weighting("inverse_distance") == KnnWeighting::inverse_distance);
  CHECK_THROWS_AS(parse_knn_weighting("gaussian"), std::invalid_argument);
}

}
