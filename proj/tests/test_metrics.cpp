#include "qutlasso/metrics.hpp"

#include "oracles.hpp"
#include "qutlasso/lasso.hpp"
#include "qutlasso/rng.hpp"
#include "qutlasso/selectors.hpp"

#include <doctest.h>

#include <cmath>
#include <optional>
#include <vector>

using namespace qut;

TEST_CASE("confusion rates from their definitions") {
  CHECK(true_positive_rate({1, 2, 3}, {1, 2}) == 1.0);
  CHECK(false_discovery_rate({1, 2, 3}, {1, 2}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  // Null-denominator conventions.
  CHECK(true_positive_rate({4, 9}, {}) == 1.0);
  CHECK(false_discovery_rate({}, {4, 9}) == 0.0);
  CHECK(true_positive_rate({}, {}) == 1.0);
  CHECK(false_discovery_rate({}, {}) == 0.0);
  // Perfect recovery.
  CHECK(true_positive_rate({3, 7}, {3, 7}) == 1.0);
  CHECK(false_discovery_rate({3, 7}, {3, 7}) == 0.0);
  // Disjoint nonempty supports.
  CHECK(true_positive_rate({1, 2}, {3, 4}) == 0.0);
  CHECK(false_discovery_rate({1, 2}, {3, 4}) == 1.0);
}

TEST_CASE("confusion rates agree with direct counting on random sets") {
  RngStream stream(71);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> est, truth;
    for (int j = 0; j < 30; ++j) {
      if (stream.uniform01() < 0.3) est.push_back(j);
      if (stream.uniform01() < 0.2) truth.push_back(j);
    }
    double tpr = true_positive_rate(est, truth);
    double fdr = false_discovery_rate(est, truth);
    CHECK(tpr == oracle::tpr_by_counting(est, truth));
    CHECK(fdr == oracle::fdr_by_counting(est, truth));
    CHECK(tpr >= 0.0);
    CHECK(tpr <= 1.0);
    CHECK(fdr >= 0.0);
    CHECK(fdr <= 1.0);
  }
}

TEST_CASE("support inclusion flag") {
  CHECK(includes_support({1, 2, 3}, {}));
  CHECK(includes_support({}, {}));
  CHECK_FALSE(includes_support({1, 2, 3}, {1, 4}));
  std::vector<int> all;
  for (int j = 0; j < 12; ++j) all.push_back(j);
  CHECK(includes_support(all, {0, 5, 11}));
  CHECK(includes_support({2, 5}, {5}));
  CHECK_FALSE(includes_support({}, {1}));
}

TEST_CASE("inclusion ratio conventions") {
  CHECK(oracle_inclusion_ratio(3, 6, true) == 0.5);
  CHECK(oracle_inclusion_ratio(3, 3, true) == 1.0);
  CHECK(oracle_inclusion_ratio(5, 10, false) == 0.0);
  CHECK(oracle_inclusion_ratio(std::nullopt, 4, false) == 0.0);
  // Both empty counts as perfect.
  CHECK(oracle_inclusion_ratio(0, 0, true) == 1.0);
  // An inclusive estimate is itself a witness when the scan found nothing.
  CHECK(oracle_inclusion_ratio(std::nullopt, 4, true) == 1.0);
  // Never exceeds one even if the scan size overshoots the estimate.
  CHECK(oracle_inclusion_ratio(9, 4, true) <= 1.0);
}

TEST_CASE("empty truth is witnessed by the empty model at the top of the grid") {
  RngStream stream(72);
  Matrix x = oracle::gaussian_matrix(25, 10, stream);
  Vector y = oracle::gaussian_vector(25, stream);
  DesignMatrix d(x);
  OracleSupportScan scan = smallest_oracle_support(d, y, {});
  REQUIRE(scan.min_size.has_value());
  CHECK(*scan.min_size == 0);
  REQUIRE(scan.lambda.has_value());
  CHECK(*scan.lambda == doctest::Approx(lambda_max(d, y)).epsilon(1e-12));
  CHECK(scan.support.empty());
}

TEST_CASE("well-separated orthonormal signal is recovered at its own size") {
  RngStream stream(73);
  Matrix q = oracle::random_orthonormal(32, stream);
  std::vector<int> truth = {2, 9, 17, 30};
  Vector beta0 = Vector::Zero(32);
  for (int j : truth) beta0(j) = 10.0;
  Vector y = q * beta0 + oracle::gaussian_vector(32, stream);
  DesignMatrix d(q);
  OracleSupportScan scan = smallest_oracle_support(d, y, truth);
  REQUIRE(scan.min_size.has_value());
  CHECK(*scan.min_size == 4);
  CHECK(scan.support == truth);
}

TEST_CASE("a decoy that absorbs the whole signal defeats every model on the grid") {
  // The true covariates sum to a noise-free response, and a decoy column
  // equals that sum; every lasso fit prefers the decoy alone, so no fit
  // contains the truth.
  RngStream stream(74);
  Matrix x(40, 3);
  x.col(1) = oracle::gaussian_vector(40, stream);
  x.col(2) = oracle::gaussian_vector(40, stream);
  x.col(0) = x.col(1) + x.col(2);
  Vector y = x.col(1) + x.col(2);
  DesignMatrix d(x);
  std::vector<int> truth = {1, 2};
  OracleSupportScan scan = smallest_oracle_support(d, y, truth);
  CHECK_FALSE(scan.min_size.has_value());
  CHECK_FALSE(scan.lambda.has_value());
  CHECK(oracle_inclusion_ratio(scan.min_size, 1, false) == 0.0);
}

TEST_CASE("the scan minimizer has the smallest false discovery among full-recall fits") {
  RngStream stream(75);
  Matrix x = oracle::gaussian_matrix(30, 8, stream);
  std::vector<int> truth = {0, 1};
  Vector y = 4.0 * x.col(0) - 3.0 * x.col(1) + oracle::gaussian_vector(30, stream);
  DesignMatrix d(x);
  OracleSupportScan scan = smallest_oracle_support(d, y, truth);
  REQUIRE(scan.min_size.has_value());

  LambdaGrid grid = make_lambda_grid(lambda_max(d, y), 200);
  auto path = lasso_path(d, y, grid);
  double best_fdr = 1.0;
  int best_size = 1 << 20;
  for (const auto& pt : path) {
    if (true_positive_rate(pt.active_set, truth) == 1.0) {
      best_fdr = std::min(best_fdr, false_discovery_rate(pt.active_set, truth));
      best_size = std::min(best_size, static_cast<int>(pt.active_set.size()));
    }
  }
  CHECK(best_size == *scan.min_size);
  CHECK(false_discovery_rate(scan.support, truth) == doctest::Approx(best_fdr).epsilon(1e-15));
}

TEST_CASE("refining the scan grid never grows the witness") {
  RngStream stream(76);
  Matrix x = oracle::gaussian_matrix(40, 15, stream);
  std::vector<int> truth = {3, 7, 11};
  Vector y = 3.0 * (x.col(3) + x.col(7) + x.col(11)) + oracle::gaussian_vector(40, stream);
  DesignMatrix d(x);
  OracleSupportScan coarse = smallest_oracle_support(d, y, truth, 50);
  OracleSupportScan fine = smallest_oracle_support(d, y, truth, 400);
  if (coarse.min_size.has_value()) {
    REQUIRE(fine.min_size.has_value());
    CHECK(*fine.min_size <= *coarse.min_size);
  }
}

TEST_CASE("held-out risk is the mean squared prediction error") {
  RngStream stream(77);
  Matrix xte = oracle::gaussian_matrix(15, 6, stream);
  Vector beta = oracle::gaussian_vector(6, stream);
  Vector yte = xte * beta;
  CHECK(predictive_risk(xte, yte, beta) == doctest::Approx(0.0).epsilon(1e-18));
  CHECK(predictive_risk(xte, yte, Vector::Zero(6)) ==
        doctest::Approx(yte.squaredNorm() / 15.0).epsilon(1e-15));
  Vector other = oracle::gaussian_vector(6, stream);
  double base = predictive_risk(xte, yte, other);
  double scaled = predictive_risk(xte, Vector(3.0 * yte), Vector(3.0 * other));
  CHECK(scaled == doctest::Approx(9.0 * base).epsilon(1e-12));
  CHECK_THROWS_AS(predictive_risk(xte, yte, Vector::Zero(5)), DimensionMismatch);
  CHECK_THROWS_AS(predictive_risk(Matrix(0, 6), Vector(0), Vector::Zero(6)), InvalidDimension);
}

TEST_CASE("per-sample signal error") {
  RngStream stream(78);
  Vector f = oracle::gaussian_vector(64, stream);
  CHECK(signal_mse(f, f) == 0.0);
  Vector shifted = f.array() + 0.7;
  CHECK(signal_mse(shifted, f) == doctest::Approx(0.49).epsilon(1e-12));
  CHECK_THROWS_AS(signal_mse(f, Vector::Zero(32)), DimensionMismatch);
  CHECK_THROWS_AS(signal_mse(Vector(0), Vector(0)), InvalidDimension);
}
