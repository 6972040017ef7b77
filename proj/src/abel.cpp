#include "qutlasso/abel.hpp"

#include <cmath>

namespace qut {

namespace {

bool power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }

void require_power_of_two(int n) {
  if (!power_of_two(n)) throw InvalidSize("size must be a positive power of two");
}

}  // namespace

AbelOperator build_abel(int n, double r_max) {
  require_power_of_two(n);
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw InvalidConfig("domain radius must be positive");

  AbelOperator op;
  op.r_max = r_max;
  const double h = r_max / static_cast<double>(n);
  op.radii.resize(n);
  for (int i = 0; i < n; ++i) op.radii[i] = (static_cast<double>(i) + 0.5) * h;

  op.matrix = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double x = op.radii[i];
    const double x2 = x * x;
    for (int j = i; j < n; ++j) {
      double a = std::max(static_cast<double>(j) * h, x);
      double b = static_cast<double>(j + 1) * h;
      if (b <= a) continue;
      double sa = std::sqrt(std::max(a * a - x2, 0.0));
      double sb = std::sqrt(std::max(b * b - x2, 0.0));
      op.matrix(i, j) = 2.0 * (sb - sa);
    }
  }
  return op;
}

Vector haar_analysis_transform(const Vector& v) {
  const int n = static_cast<int>(v.size());
  require_power_of_two(n);
  const double inv_sqrt2 = 0.70710678118654752440;
  Vector out(n);
  Vector cur = v;
  int len = n;
  while (len > 1) {
    int half = len / 2;
    Vector approx(half);
    for (int i = 0; i < half; ++i) {
      approx[i] = (cur[2 * i] + cur[2 * i + 1]) * inv_sqrt2;
      out[half + i] = (cur[2 * i] - cur[2 * i + 1]) * inv_sqrt2;
    }
    cur = approx;
    len = half;
  }
  out[0] = cur[0];
  return out;
}

Vector haar_synthesis_transform(const Vector& c) {
  const int n = static_cast<int>(c.size());
  require_power_of_two(n);
  const double inv_sqrt2 = 0.70710678118654752440;
  Vector cur(1);
  cur[0] = c[0];
  int len = 1;
  while (len < n) {
    Vector next(2 * len);
    for (int i = 0; i < len; ++i) {
      next[2 * i] = (cur[i] + c[len + i]) * inv_sqrt2;
      next[2 * i + 1] = (cur[i] - c[len + i]) * inv_sqrt2;
    }
    cur = std::move(next);
    len *= 2;
  }
  return cur;
}

Matrix haar_synthesis(int n) {
  require_power_of_two(n);
  Matrix w(n, n);
  Vector unit = Vector::Zero(n);
  for (int j = 0; j < n; ++j) {
    unit[j] = 1.0;
    w.col(j) = haar_synthesis_transform(unit);
    unit[j] = 0.0;
  }
  return w;
}

Vector blocks_profile(int n, double r_max) {
  if (n < 1) throw InvalidSize("need at least one sample");
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw InvalidConfig("domain radius must be positive");
  // Jump locations as multiples of 1/512 and the step heights at each jump.
  static const int num[11] = {51, 67, 77, 118, 128, 205, 225, 333, 389, 400, 415};
  static const double height[11] = {4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2};
  Vector f(n);
  for (int i = 0; i < n; ++i) {
    double t = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    double v = 0.0;
    for (int j = 0; j < 11; ++j)
      if (t > static_cast<double>(num[j]) / 512.0) v += height[j];
    f[i] = v;
  }
  return f;
}

}  // namespace qut
