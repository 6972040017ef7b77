#include "qutlasso/abel.hpp"

#include "oracles.hpp"
#include "qutlasso/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace qut;

TEST_CASE("projection of the zero profile vanishes") {
  AbelOperator op = build_abel(64, 10.0);
  Vector g = op.matrix * Vector::Zero(64);
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("grid points sit at cell midpoints") {
  AbelOperator op = build_abel(8, 4.0);
  REQUIRE(op.radii.size() == 8);
  CHECK(op.radii(0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(op.radii(7) == doctest::Approx(3.75).epsilon(1e-15));
  CHECK(op.r_max == 4.0);
}

TEST_CASE("operator is upper triangular with a positive diagonal") {
  AbelOperator op = build_abel(32, 7.0);
  for (int i = 0; i < 32; ++i) {
    CHECK(op.matrix(i, i) > 0.0);
    for (int j = 0; j < i; ++j) CHECK(op.matrix(i, j) == 0.0);
    for (int j = i; j < 32; ++j) CHECK(op.matrix(i, j) >= 0.0);
  }
}

TEST_CASE("projection of a disk matches the analytic chord length") {
  // f = indicator of r < R projects to 2 sqrt(R^2 - x^2).
  const int n = 512;
  const double r_max = 1.0;
  const double radius = 0.4;
  AbelOperator op = build_abel(n, r_max);
  Vector f(n);
  for (int i = 0; i < n; ++i) f(i) = op.radii(i) < radius ? 1.0 : 0.0;
  Vector g = op.matrix * f;
  Vector exact(n);
  for (int i = 0; i < n; ++i) exact(i) = oracle::disk_projection(op.radii(i), radius);
  double rel = (g - exact).norm() / exact.norm();
  CHECK(rel < 0.02);
}

TEST_CASE("constant profile is projected exactly") {
  // For f = 1 on the whole domain, the cell integrals telescope to the
  // closed form 2 sqrt(rmax^2 - x^2).
  AbelOperator op = build_abel(128, 5.0);
  Vector g = op.matrix * Vector::Ones(128);
  for (int i = 0; i < 128; ++i) {
    double x = op.radii(i);
    double expect = 2.0 * std::sqrt(op.r_max * op.r_max - x * x);
    CHECK(g(i) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("projection is linear") {
  RngStream stream(81);
  AbelOperator op = build_abel(64, 3.0);
  Vector f1 = oracle::gaussian_vector(64, stream);
  Vector f2 = oracle::gaussian_vector(64, stream);
  Vector lhs = op.matrix * (2.0 * f1 - 3.0 * f2);
  Vector rhs = 2.0 * (op.matrix * f1) - 3.0 * (op.matrix * f2);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("operator sizes are validated") {
  CHECK_THROWS_AS(build_abel(100, 1.0), InvalidSize);
  CHECK_THROWS_AS(build_abel(0, 1.0), InvalidSize);
  CHECK_THROWS_AS(build_abel(-8, 1.0), InvalidSize);
  CHECK_THROWS_AS(build_abel(64, 0.0), InvalidConfig);
  CHECK_THROWS_AS(build_abel(64, -2.0), InvalidConfig);
  CHECK_THROWS_AS(haar_synthesis(48), InvalidSize);
}

TEST_CASE("wavelet basis is orthonormal") {
  for (int n : {8, 64, 512}) {
    Matrix w = haar_synthesis(n);
    Matrix gram = w.transpose() * w;
    double dev = (gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    CHECK(dev < 1e-10);
  }
}

TEST_CASE("first basis column is the scaling vector") {
  Matrix w = haar_synthesis(16);
  for (int i = 0; i < 16; ++i) CHECK(w(i, 0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("pyramid transforms match the explicit matrix") {
  RngStream stream(82);
  for (int n : {8, 32, 256}) {
    Matrix w = haar_synthesis(n);
    Vector v = oracle::gaussian_vector(n, stream);
    Vector c_fast = haar_analysis_transform(v);
    Vector c_mat = w.transpose() * v;
    CHECK((c_fast - c_mat).cwiseAbs().maxCoeff() < 1e-11);
    Vector back_fast = haar_synthesis_transform(c_fast);
    Vector back_mat = w * c_fast;
    CHECK((back_fast - back_mat).cwiseAbs().maxCoeff() < 1e-11);
    // Round trip.
    CHECK((back_fast - v).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("constant signals compress to a single coefficient") {
  Vector v = Vector::Constant(64, 3.25);
  Vector c = haar_analysis_transform(v);
  CHECK(c(0) == doctest::Approx(3.25 * 8.0).epsilon(1e-12));  // sqrt(64) scaling
  CHECK(c.tail(63).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("piecewise-constant test profile has the expected sparse transform") {
  Vector f = blocks_profile(512, 100.0);
  REQUIRE(f.size() == 512);
  Vector c = haar_analysis_transform(f);
  int nonzero = 0;
  for (int i = 0; i < 512; ++i) {
    if (std::abs(c(i)) > 1e-10) ++nonzero;
  }
  CHECK(nonzero == 54);
  // Eleven jumps on a piecewise-constant profile.
  int jumps = 0;
  for (int i = 1; i < 512; ++i) {
    if (f(i) != f(i - 1)) ++jumps;
  }
  CHECK(jumps == 11);
  // The profile is constant between jumps, so reconstruction from the
  // nonzero coefficients alone is exact.
  Vector thresholded = c;
  for (int i = 0; i < 512; ++i) {
    if (std::abs(thresholded(i)) <= 1e-10) thresholded(i) = 0.0;
  }
  Vector back = haar_synthesis_transform(thresholded);
  CHECK((back - f).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("test profile scales with the domain but keeps its shape") {
  Vector a = blocks_profile(256, 1.0);
  Vector b = blocks_profile(256, 50.0);
  // Jump heights do not depend on the radius scale.
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(blocks_profile(0, 1.0), InvalidSize);
  CHECK_THROWS_AS(blocks_profile(64, -1.0), InvalidConfig);
}
