#pragma once

#include "qutlasso/types.hpp"

#include <optional>
#include <vector>

namespace qut {

struct SelectionMetrics {
  double tpr = 0.0;
  double fdr = 0.0;
  bool oracle_inclusive = false;
  double oir = 0.0;
  int support_size = 0;
};

// Null-denominator conventions: an empty true support gives tpr 1, an empty
// estimate gives fdr 0.
double true_positive_rate(const std::vector<int>& estimate, const std::vector<int>& truth);
double false_discovery_rate(const std::vector<int>& estimate, const std::vector<int>& truth);
bool includes_support(const std::vector<int>& estimate, const std::vector<int>& truth);

struct OracleSupportScan {
  std::optional<int> min_size;   // absent: no fit on the grid contains the truth
  std::optional<double> lambda;  // largest penalty attaining min_size
  std::vector<int> support;      // the minimizing active set
};

/// Scan lasso fits over a geometric penalty grid for the sparsest active set
/// that still contains the whole true support, preferring the largest
/// penalty that attains it.
OracleSupportScan smallest_oracle_support(const DesignMatrix& X, const Vector& y,
                                          const std::vector<int>& truth, int grid_size = 200,
                                          double grid_eps = 1e-3, double tol = 1e-7,
                                          int max_iter = 100000);

/// Ratio of the sparsest truth-containing model size to the estimated model
/// size: zero when the estimate misses part of the truth (its effective size
/// is infinite), one when truth and estimate are both empty, otherwise
/// clipped to at most one. An absent scan size with an inclusive estimate
/// also gives one: the estimate itself witnesses a truth-containing model no
/// larger than itself.
double oracle_inclusion_ratio(std::optional<int> scan_min_size, int estimate_size,
                              bool estimate_inclusive);

/// Mean squared prediction error on held-out rows.
double predictive_risk(const Matrix& x_test, const Vector& y_test, const Vector& beta);

/// Per-sample squared error ||a - b||^2 / n.
double signal_mse(const Vector& estimate, const Vector& truth);

}  // namespace qut
