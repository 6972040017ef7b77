#include "qutlasso/metrics.hpp"

#include "qutlasso/lasso.hpp"
#include "qutlasso/selectors.hpp"

#include <algorithm>

namespace qut {

namespace {
std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}
}  // namespace

double true_positive_rate(const std::vector<int>& estimate, const std::vector<int>& truth) {
  auto t = sorted_unique(truth);
  if (t.empty()) return 1.0;
  auto e = sorted_unique(estimate);
  std::vector<int> hit;
  std::set_intersection(e.begin(), e.end(), t.begin(), t.end(), std::back_inserter(hit));
  return static_cast<double>(hit.size()) / static_cast<double>(t.size());
}

double false_discovery_rate(const std::vector<int>& estimate, const std::vector<int>& truth) {
  auto e = sorted_unique(estimate);
  if (e.empty()) return 0.0;
  auto t = sorted_unique(truth);
  std::vector<int> hit;
  std::set_intersection(e.begin(), e.end(), t.begin(), t.end(), std::back_inserter(hit));
  return static_cast<double>(e.size() - hit.size()) / static_cast<double>(e.size());
}

bool includes_support(const std::vector<int>& estimate, const std::vector<int>& truth) {
  auto e = sorted_unique(estimate);
  auto t = sorted_unique(truth);
  return std::includes(e.begin(), e.end(), t.begin(), t.end());
}

OracleSupportScan smallest_oracle_support(const DesignMatrix& X, const Vector& y,
                                          const std::vector<int>& truth, int grid_size,
                                          double grid_eps, double tol, int max_iter) {
  check_design_response(X, y);
  OracleSupportScan scan;
  double lmax = lambda_max(X, y);
  if (lmax <= 0.0) {
    // Zero response: the empty fit is the whole path.
    if (sorted_unique(truth).empty()) {
      scan.min_size = 0;
      scan.lambda = 0.0;
    }
    return scan;
  }
  LambdaGrid grid = make_lambda_grid(lmax, grid_size, grid_eps);
  auto path = lasso_path(X, y, grid, tol, max_iter);
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!includes_support(path[i].active_set, truth)) continue;
    int size = static_cast<int>(path[i].active_set.size());
    if (!scan.min_size || size < *scan.min_size) {
      scan.min_size = size;
      scan.lambda = grid.values[i];
      scan.support = path[i].active_set;
    }
  }
  return scan;
}

double oracle_inclusion_ratio(std::optional<int> scan_min_size, int estimate_size,
                              bool estimate_inclusive) {
  if (!estimate_inclusive) return 0.0;
  if (estimate_size <= 0) return 1.0;  // inclusive and empty: truth is empty too
  if (!scan_min_size) return 1.0;      // the estimate itself witnesses s* <= |estimate|
  return std::min(1.0, static_cast<double>(*scan_min_size) / static_cast<double>(estimate_size));
}

double predictive_risk(const Matrix& x_test, const Vector& y_test, const Vector& beta) {
  if (x_test.rows() != y_test.size() || x_test.cols() != beta.size())
    throw DimensionMismatch("test data dimensions do not match the coefficients");
  if (y_test.size() == 0) throw InvalidDimension("empty test set");
  return (y_test - x_test * beta).squaredNorm() / static_cast<double>(y_test.size());
}

double signal_mse(const Vector& estimate, const Vector& truth) {
  if (estimate.size() != truth.size())
    throw DimensionMismatch("signal lengths differ");
  if (estimate.size() == 0) throw InvalidDimension("empty signal");
  return (estimate - truth).squaredNorm() / static_cast<double>(estimate.size());
}

}  // namespace qut
