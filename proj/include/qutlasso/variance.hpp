#pragma once

#include "qutlasso/types.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace qut {

struct VarianceEstimate {
  double sigma2 = 0.0;
  std::string method;
  int k_used = 0;              // degrees-of-freedom correction; -1 when per-half (see details)
  bool dof_fallback = false;   // some half fell back to k = 0
  std::map<std::string, double> details;
};

/// ||y - X beta||^2 / (N - k); requires 0 <= k < N.
VarianceEstimate residual_variance(const DesignMatrix& X, const Vector& y, const Vector& beta,
                                   int k);

struct RcvOptions {
  std::string inner_selector = "cv";  // "cv" or "sl"
  int cv_folds = 10;
  int grid_size = 100;
  double grid_eps = 1e-3;
  int max_active = -1;  // support cap for the inner selection paths
};

/// Refitted cross validation: one seed-deterministic split into two halves,
/// a model selected on each half (lasso + inner selector), each support
/// refit by least squares on the opposite half, and the two corrected
/// residual variances (k = selected support size) averaged. A half whose
/// crossed support size reaches the opposite half's row count falls back to
/// k = 0 and sets dof_fallback. Per-half numbers are reported in details.
VarianceEstimate rcv_variance(const DesignMatrix& X, const Vector& y, std::uint64_t seed,
                              const RcvOptions& opts = {});

}  // namespace qut
