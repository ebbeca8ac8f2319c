#include <doctest.h>

#include <cmath>
#include <random>

#include "offload/error.hpp"
#include "offload/estimators.hpp"

using namespace offload;

namespace {

Matrix uniform_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = u(rng);
  }
  return x;
}

std::vector<double> row(const Matrix& x, Eigen::Index r) {
  std::vector<double> v(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) v[static_cast<std::size_t>(c)] = x(r, c);
  return v;
}

Vector smooth_target(const Matrix& x) {
  Vector y(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) y(r) = 3 * x(r, 0) + std::sin(6 * x(r, 1)) + x(r, 2) * x(r, 3);
  return y;
}

}  // namespace

TEST_CASE("a depth-zero single tree predicts the training mean") {
  const Matrix x = uniform_matrix(50, 3, 1);
  const Vector y = smooth_target(uniform_matrix(50, 4, 2));
  ForestParams p;
  p.trees = 1;
  p.max_depth = 0;
  p.bootstrap = false;
  const ForestModel m = fit_rfr(x, y, p, 3);
  REQUIRE(m.trees.size() == 1);
  CHECK(m.trees[0].nodes.size() == 1);
  for (Eigen::Index r = 0; r < 10; ++r) CHECK(m.predict(row(x, r)) == doctest::Approx(y.mean()).epsilon(1e-12));
}

TEST_CASE("deep unbootstrapped trees memorise the training set") {
  const Matrix x = uniform_matrix(200, 4, 4);
  const Vector y = smooth_target(x);
  ForestParams p;
  p.trees = 5;
  p.max_depth = 64;
  p.min_samples_leaf = 1;
  p.bootstrap = false;
  const ForestModel m = fit_rfr(x, y, p, 5);
  double err = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) err += std::abs(m.predict(row(x, r)) - y(r));
  CHECK(err / static_cast<double>(x.rows()) <= 1e-9);
}

TEST_CASE("trees beat a linear fit on a step target") {
  const Matrix x = uniform_matrix(1000, 3, 6);
  Vector y(1000);
  for (Eigen::Index r = 0; r < 1000; ++r) y(r) = x(r, 0) > 0.5 ? 10.0 : 0.0;
  const Matrix xt = uniform_matrix(400, 3, 7);
  Vector yt(400);
  for (Eigen::Index r = 0; r < 400; ++r) yt(r) = xt(r, 0) > 0.5 ? 10.0 : 0.0;

  const ForestModel forest = fit_rfr(x, y, {}, 8);
  const LinearModel linear = fit_mlr(x, y);
  double mae_forest = 0.0, mae_linear = 0.0;
  for (Eigen::Index r = 0; r < 400; ++r) {
    const auto v = row(xt, r);
    mae_forest += std::abs(forest.predict(v) - yt(r)) / 400.0;
    mae_linear += std::abs(linear.predict(v) - yt(r)) / 400.0;
  }
  CHECK(mae_forest < mae_linear);
  CHECK(mae_forest < 0.5);
}

TEST_CASE("forest structure invariants") {
  const Matrix x = uniform_matrix(300, 5, 9);
  const Vector y = smooth_target(x);
  for (int leaf : {1, 2, 5, 17}) {
    ForestParams p;
    p.trees = 10;
    p.min_samples_leaf = leaf;
    const ForestModel m = fit_rfr(x, y, p, 10);
    CHECK(m.trees.size() == 10);
    for (const auto& t : m.trees) {
      CHECK(t.nodes[0].samples == 300);
      for (const auto& n : t.nodes) {
        if (n.feature < 0) {
          CHECK(n.samples >= leaf);
        } else {
          CHECK(t.nodes[static_cast<std::size_t>(n.left)].samples +
                    t.nodes[static_cast<std::size_t>(n.right)].samples ==
                n.samples);
        }
      }
    }
    // Predictions stay within the training target range.
    const Matrix probe = uniform_matrix(200, 5, 11) * 3.0 - Matrix::Constant(200, 5, 1.0);
    for (Eigen::Index r = 0; r < probe.rows(); ++r) {
      const double v = m.predict(row(probe, r));
      CHECK(v >= y.minCoeff());
      CHECK(v <= y.maxCoeff());
    }
  }
}

TEST_CASE("constant targets give constant predictions") {
  const Matrix x = uniform_matrix(40, 3, 12);
  const ForestModel m = fit_rfr(x, Vector::Constant(40, 2.5), {}, 1);
  const Matrix probe = uniform_matrix(20, 3, 13);
  for (Eigen::Index r = 0; r < probe.rows(); ++r) CHECK(m.predict(row(probe, r)) == 2.5);
}

TEST_CASE("forests are deterministic in the seed") {
  const Matrix x = uniform_matrix(150, 4, 14);
  const Vector y = smooth_target(x);
  ForestParams p;
  p.trees = 20;
  const ForestModel a = fit_rfr(x, y, p, 77), b = fit_rfr(x, y, p, 77), c = fit_rfr(x, y, p, 78);
  bool differs = false;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const auto v = row(x, r);
    CHECK(a.predict(v) == b.predict(v));
    differs = differs || a.predict(v) != c.predict(v);
  }
  CHECK(differs);
}

TEST_CASE("forest argument checks") {
  const Matrix x = uniform_matrix(5, 2, 15);
  const Vector y = Vector::LinSpaced(5, 0, 1);
  ForestParams p;
  p.min_samples_leaf = 6;
  CHECK_THROWS_AS(fit_rfr(x, y, p, 1), ConfigError);
  p = {};
  p.trees = 0;
  CHECK_THROWS_AS(fit_rfr(x, y, p, 1), ConfigError);
  p = {};
  p.features_per_split = 3;
  CHECK_THROWS_AS(fit_rfr(x, y, p, 1), ConfigError);
}

TEST_CASE("forest JSON round-trip") {
  const Matrix x = uniform_matrix(120, 4, 16);
  const Vector y = smooth_target(x);
  ForestParams p;
  p.trees = 15;
  p.features_per_split = 2;
  const Regressor r(fit_rfr(x, y, p, 4));
  const Regressor back = Regressor::from_json(nlohmann::json::parse(r.to_json().dump()));
  CHECK(back.kind() == ModelKind::Rfr);
  for (Eigen::Index i = 0; i < x.rows(); ++i) CHECK(back.predict(row(x, i)) == r.predict(row(x, i)));

  auto doc = r.to_json();
  doc["trees"][0]["left"][0] = 0;
  CHECK_THROWS_AS(Regressor::from_json(doc), ParseError);
}
