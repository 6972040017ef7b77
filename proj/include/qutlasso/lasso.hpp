#pragma once

#include "qutlasso/types.hpp"

namespace qut {

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

struct StandardizeOptions {
  bool center = false;
};

/// Scale each column to unit empirical variance (1/N, about the mean) and
/// record the factors. Columns whose standard deviation is below
/// 1e-12*(1 + |mean|) are flagged constant and left untouched with scale 1.
DesignMatrix standardize(const Matrix& raw, const StandardizeOptions& opts = {});

/// Apply the transform recorded in `reference` to new rows (e.g. test data).
Matrix apply_standardization(const DesignMatrix& reference, const Matrix& raw);

/// Map coefficients for the scaled columns back to the raw measurement units.
Vector to_original_scale(const DesignMatrix& X, const Vector& beta_scaled);

/// ||X^T y||_inf, the smallest penalty with all-zero solution.
double lambda_max(const DesignMatrix& X, const Vector& y);

/// Cyclic coordinate descent for 0.5*||y - X b||^2 + lambda*||b||_1.
/// The gradient is maintained through Gram columns built lazily the first
/// time a coordinate moves, so a full sweep over inactive coordinates costs
/// O(P) plus O(N P) once per coordinate ever activated. Columns flagged
/// constant, and exactly zero columns, keep coefficient zero.
///
/// Convergence means a verified stationarity certificate: with residual
/// gradient g = X^T(y - X b) computed from scratch,
///   max_p  |g_p| - lambda          over inactive p,
///           |g_p - lambda*sgn b_p| over active p
/// is at most tol*(1 + lambda). Sweeping pauses when the largest coefficient
/// change drops below a working threshold (initially tol*(1 + ||b||_inf));
/// if the certificate fails the threshold tightens tenfold and sweeping
/// resumes, until max_iter sweeps are spent.
class LassoSolver {
 public:
  static constexpr double kDefaultTol = 1e-7;
  static constexpr int kDefaultMaxIter = 100000;

  explicit LassoSolver(const DesignMatrix& X);  // X must outlive the solver

  void set_response(const Vector& y);

  // Cold start from b = 0.
  LassoFit fit(double lambda, double tol = kDefaultTol, int max_iter = kDefaultMaxIter);

  // Warm start from beta0 (e.g. the previous point on a penalty path).
  LassoFit fit_warm(const Vector& beta0, double lambda, double tol = kDefaultTol,
                    int max_iter = kDefaultMaxIter);

  // When set, the exact objective is appended once per sweep.
  void set_objective_trace(std::vector<double>* trace) { trace_ = trace; }

 private:
  LassoFit run(double lambda, double tol, int max_iter);
  const double* gram_column(int j);
  void resync_gradient();

  const DesignMatrix* X_;
  Vector y_;
  Vector xty_;
  Vector col_norm2_;
  Vector beta_;
  Vector xtxb_;  // X^T X b, updated incrementally
  std::vector<char> skip_;
  Matrix gram_;
  std::vector<int> gram_slot_;
  int gram_count_ = 0;
  std::vector<double>* trace_ = nullptr;
};

LassoFit fit_lasso(const DesignMatrix& X, const Vector& y, double lambda,
                   double tol = LassoSolver::kDefaultTol,
                   int max_iter = LassoSolver::kDefaultMaxIter);

/// Unpenalized least squares on the given support, zeros elsewhere. Uses a
/// rank-revealing decomposition (threshold 1e-10) and returns the minimum
/// norm solution when the restricted design is rank deficient. An empty
/// support gives the zero vector.
Vector refit_least_squares(const DesignMatrix& X, const Vector& y,
                           const std::vector<int>& support);

}  // namespace qut
