#pragma once

#include "qutlasso/types.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace qut {

struct LambdaGrid {
  std::vector<double> values;  // strictly decreasing, all positive
};

/// Geometric grid of g penalties from lambda_max down to eps*lambda_max.
LambdaGrid make_lambda_grid(double lambda_max_value, int g = 100, double eps = 1e-3);

struct SelectionOutcome {
  std::string rule;
  double lambda = 0.0;
  std::vector<int> support;  // nonzeros of the lasso fit at lambda, before refitting
  Vector beta_refit;         // least-squares refit on the support
  double sigma_used = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, std::vector<double>> diagnostics;
  bool converged = true;
};

struct PathPoint {
  double lambda = 0.0;
  Vector beta;
  std::vector<int> active_set;
  double rss = 0.0;
  bool converged = true;
};

/// Lasso fits along the grid, warm started from large penalties to small.
/// stop_index >= 0 truncates the path after that grid position; max_active
/// >= 0 stops before the first fit whose support exceeds that size, the
/// usual df cap for paths that only feed a criterion whose optimum sits at
/// moderate support sizes.
std::vector<PathPoint> lasso_path(const DesignMatrix& X, const Vector& y,
                                  const LambdaGrid& grid, double tol = 1e-7,
                                  int max_iter = 100000, int stop_index = -1,
                                  int max_active = -1);

/// k-fold cross validation: seed-deterministic row partition, per-fold lasso
/// paths over the shared grid, mean of per-fold held-out MSEs, ties broken
/// toward the larger penalty. max_active >= 0 caps the per-fold paths by
/// support size; only the grid prefix computed in every fold competes.
SelectionOutcome select_cv(const DesignMatrix& X, const Vector& y, const LambdaGrid& grid,
                           int folds, std::uint64_t seed, int max_active = -1);

/// Gaussian -2 log-likelihood plus |support| * ln N along the grid.
SelectionOutcome select_bic(const DesignMatrix& X, const Vector& y, const LambdaGrid& grid,
                            double sigma, int max_active = -1);

enum class RankPolicy {
  exact,       // pivoted QR of the active columns, relative threshold 1e-10
  assume_full  // rank = min(|active|, N); only for designs with every column
               // subset independent (e.g. any column subset of a nonsingular
               // square design)
};

/// Unbiased risk estimate RSS + 2 sigma^2 rank(X restricted to the active
/// set) along the grid; the rank set approximates the set of columns at the
/// correlation bound by the active set.
SelectionOutcome select_sure(const DesignMatrix& X, const Vector& y, const LambdaGrid& grid,
                             double sigma, RankPolicy rank_policy = RankPolicy::exact,
                             int max_active = -1);

// Selection criteria evaluated on a precomputed path (shared by drivers that
// score several rules on the same fits).
SelectionOutcome bic_from_path(const DesignMatrix& X, const Vector& y,
                               const std::vector<PathPoint>& path, const LambdaGrid& grid,
                               double sigma);
SelectionOutcome sure_from_path(const DesignMatrix& X, const Vector& y,
                                const std::vector<PathPoint>& path, const LambdaGrid& grid,
                                double sigma, RankPolicy rank_policy);

/// Default penalty multiplier sqrt(2 ln P) for the joint scale estimate.
double scaled_lasso_lambda0(int p);

/// Alternates a lasso update at penalty sigma_hat*lambda0*sqrt(N) with the
/// degrees-of-freedom corrected variance update sigma_hat^2 = RSS/((1-a)N)
/// until sigma_hat moves by less than tol relatively. lambda0 is quoted per
/// unit column norm (the customary sqrt(2 log P) scale); the sqrt(N) factor
/// adapts it to unit-variance columns under the raw sum-of-squares loss.
/// sigma_used carries the final scale; diagnostics flag a collapse to a
/// perfect fit (sigma_hat below 1e-8) and carry the sigma trace.
SelectionOutcome select_scaled_lasso(const DesignMatrix& X, const Vector& y, double lambda0,
                                     double a = 0.0, double tol = 1e-6, int max_iter = 100);
SelectionOutcome select_scaled_lasso(const DesignMatrix& X, const Vector& y);

/// One lasso fit at sigma times the Monte Carlo null quantile of
/// ||X^T y||_inf, refit by least squares.
SelectionOutcome select_qut(const DesignMatrix& X, const Vector& y, double sigma,
                            int mc_draws, std::uint64_t seed, int threads = 0);

}  // namespace qut
