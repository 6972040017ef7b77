#pragma once

// Small independent reference implementations the tests compare against.
// Everything here is deliberately naive (full enumeration, dense solves,
// full sorts) and shares no code with the library paths under test.

#include "qutlasso/rng.hpp"
#include "qutlasso/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace oracle {

inline qut::Matrix gaussian_matrix(int n, int p, qut::RngStream& stream) {
  qut::Matrix x(n, p);
  stream.fill_normal(x.data(), static_cast<std::size_t>(n) * static_cast<std::size_t>(p));
  return x;
}

inline qut::Vector gaussian_vector(int n, qut::RngStream& stream) {
  qut::Vector v(n);
  stream.fill_normal(v.data(), static_cast<std::size_t>(n));
  return v;
}

// Square matrix with orthonormal columns, from the QR factorization of a
// Gaussian draw.
inline qut::Matrix random_orthonormal(int n, qut::RngStream& stream) {
  qut::Matrix g = gaussian_matrix(n, n, stream);
  Eigen::HouseholderQR<qut::Matrix> qr(g);
  return qr.householderQ() * qut::Matrix::Identity(n, n);
}

inline double l1_objective(const qut::Matrix& x, const qut::Vector& y, double lambda,
                           const qut::Vector& beta) {
  return 0.5 * (y - x * beta).squaredNorm() + lambda * beta.lpNorm<1>();
}

// Exact lasso minimizer by sign enumeration: every pattern in {-1,0,+1}^P
// yields a linear stationarity system on its active set; a candidate whose
// solution matches the assumed signs and satisfies the subgradient bound on
// the inactive set is a global minimizer. Among verified candidates the
// smallest objective is returned (they agree when the minimizer is unique).
// Only meant for tiny P.
inline std::optional<qut::Vector> lasso_sign_enumeration(const qut::Matrix& x,
                                                         const qut::Vector& y, double lambda) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const double slack = 1e-8 * (1.0 + lambda);

  std::optional<qut::Vector> best;
  double best_obj = 0.0;

  std::vector<int> pattern(static_cast<std::size_t>(p), -1);
  long total = 1;
  for (int j = 0; j < p; ++j) total *= 3;
  for (long code = 0; code < total; ++code) {
    long rem = code;
    std::vector<int> active;
    std::vector<double> signs;
    for (int j = 0; j < p; ++j) {
      int s = static_cast<int>(rem % 3) - 1;  // -1, 0, +1
      rem /= 3;
      pattern[static_cast<std::size_t>(j)] = s;
      if (s != 0) {
        active.push_back(j);
        signs.push_back(static_cast<double>(s));
      }
    }
    const int a = static_cast<int>(active.size());
    if (a > n) continue;  // stationarity system overdetermined, no unique candidate

    qut::Vector beta = qut::Vector::Zero(p);
    if (a > 0) {
      qut::Matrix xa(n, a);
      qut::Vector sa(a);
      for (int i = 0; i < a; ++i) {
        xa.col(i) = x.col(active[static_cast<std::size_t>(i)]);
        sa(i) = signs[static_cast<std::size_t>(i)];
      }
      Eigen::FullPivLU<qut::Matrix> lu(xa.transpose() * xa);
      if (!lu.isInvertible()) continue;
      qut::Vector ba = lu.solve(xa.transpose() * y - lambda * sa);
      bool sign_ok = true;
      for (int i = 0; i < a; ++i) {
        if (ba(i) * sa(i) <= 0.0) {
          sign_ok = false;
          break;
        }
      }
      if (!sign_ok) continue;
      for (int i = 0; i < a; ++i) beta(active[static_cast<std::size_t>(i)]) = ba(i);
    }

    qut::Vector grad = x.transpose() * (y - x * beta);
    bool kkt_ok = true;
    for (int j = 0; j < p; ++j) {
      if (pattern[static_cast<std::size_t>(j)] == 0) {
        if (std::abs(grad(j)) > lambda + slack) {
          kkt_ok = false;
          break;
        }
      }
    }
    if (!kkt_ok) continue;

    double obj = l1_objective(x, y, lambda, beta);
    if (!best || obj < best_obj) {
      best = beta;
      best_obj = obj;
    }
  }
  return best;
}

// Upper empirical quantile by full sort: 1-based order statistic at
// ceil(q*m), computed with plain std::ceil.
inline double sorted_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  auto m = static_cast<double>(v.size());
  auto pos = static_cast<std::size_t>(std::ceil(q * m));
  if (pos < 1) pos = 1;
  if (pos > v.size()) pos = v.size();
  return v[pos - 1];
}

// Minimum-norm least squares on a column subset via SVD.
inline qut::Vector restricted_ls(const qut::Matrix& x, const qut::Vector& y,
                                 const std::vector<int>& support) {
  qut::Vector beta = qut::Vector::Zero(x.cols());
  if (support.empty()) return beta;
  qut::Matrix xa(x.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t i = 0; i < support.size(); ++i) {
    xa.col(static_cast<Eigen::Index>(i)) = x.col(support[i]);
  }
  Eigen::JacobiSVD<qut::Matrix> svd(xa, Eigen::ComputeThinU | Eigen::ComputeThinV);
  qut::Vector ba = svd.solve(y);
  for (std::size_t i = 0; i < support.size(); ++i) {
    beta(support[i]) = ba(static_cast<Eigen::Index>(i));
  }
  return beta;
}

inline bool contains(const std::vector<int>& v, int value) {
  return std::find(v.begin(), v.end(), value) != v.end();
}

// Confusion rates by direct counting.
inline double tpr_by_counting(const std::vector<int>& estimate, const std::vector<int>& truth) {
  if (truth.empty()) return 1.0;
  int hit = 0;
  for (int t : truth) {
    if (contains(estimate, t)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

inline double fdr_by_counting(const std::vector<int>& estimate, const std::vector<int>& truth) {
  if (estimate.empty()) return 0.0;
  int wrong = 0;
  for (int e : estimate) {
    if (!contains(truth, e)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(estimate.size());
}

// Projection of the centered unit disk of radius R: 2*sqrt(R^2 - x^2)
// inside, zero outside.
inline double disk_projection(double x, double radius) {
  if (x >= radius) return 0.0;
  return 2.0 * std::sqrt(radius * radius - x * x);
}

}  // namespace oracle
