#include "qutlasso/selectors.hpp"

#include "qutlasso/lasso.hpp"
#include "qutlasso/rng.hpp"
#include "qutlasso/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qut {

namespace {

constexpr double kTwoPi = 6.28318530717958647692528676656;

double residual_sum_of_squares(const DesignMatrix& X, const Vector& y, const Vector& beta) {
  Vector r = y;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) r -= beta[j] * X.values.col(j);
  return r.squaredNorm();
}

void check_grid(const LambdaGrid& grid) {
  if (grid.values.empty()) throw InvalidConfig("penalty grid is empty");
  double prev = std::numeric_limits<double>::infinity();
  for (double v : grid.values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidConfig("penalty grid entries must be positive");
    if (!(v < prev)) throw InvalidConfig("penalty grid must be strictly decreasing");
    prev = v;
  }
}

// First (largest-penalty) strict minimum of the criterion curve.
std::size_t argmin_prefer_large_lambda(const std::vector<double>& curve) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i] < curve[best]) best = i;
  return best;
}

int active_rank(const DesignMatrix& X, const std::vector<int>& active, RankPolicy policy) {
  if (active.empty()) return 0;
  if (policy == RankPolicy::assume_full)
    return static_cast<int>(std::min<Eigen::Index>(static_cast<Eigen::Index>(active.size()), X.n()));
  Matrix sub(X.n(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t i = 0; i < active.size(); ++i)
    sub.col(static_cast<Eigen::Index>(i)) = X.values.col(active[i]);
  Eigen::ColPivHouseholderQR<Matrix> qr;
  qr.setThreshold(1e-10);
  qr.compute(sub);
  return static_cast<int>(qr.rank());
}

SelectionOutcome outcome_from_path_point(const std::string& rule, const DesignMatrix& X,
                                         const Vector& y, const PathPoint& pt) {
  SelectionOutcome out;
  out.rule = rule;
  out.lambda = pt.lambda;
  out.support = pt.active_set;
  out.beta_refit = refit_least_squares(X, y, pt.active_set);
  out.converged = pt.converged;
  return out;
}

}  // namespace

LambdaGrid make_lambda_grid(double lambda_max_value, int g, double eps) {
  if (!(lambda_max_value > 0.0) || !std::isfinite(lambda_max_value))
    throw InvalidConfig("grid needs a positive finite top penalty");
  if (g < 1) throw InvalidConfig("grid needs at least one point");
  if (!(eps > 0.0) || eps > 1.0) throw InvalidConfig("grid floor ratio must be in (0, 1]");
  LambdaGrid grid;
  grid.values.resize(static_cast<std::size_t>(g));
  grid.values[0] = lambda_max_value;
  if (g == 1) return grid;
  double ratio = std::pow(eps, 1.0 / static_cast<double>(g - 1));
  for (int i = 1; i < g; ++i) grid.values[static_cast<std::size_t>(i)] = grid.values[static_cast<std::size_t>(i - 1)] * ratio;
  return grid;
}

std::vector<PathPoint> lasso_path(const DesignMatrix& X, const Vector& y, const LambdaGrid& grid,
                                  double tol, int max_iter, int stop_index, int max_active) {
  check_grid(grid);
  check_design_response(X, y);
  std::size_t count = grid.values.size();
  if (stop_index >= 0) count = std::min(count, static_cast<std::size_t>(stop_index) + 1);

  LassoSolver solver(X);
  solver.set_response(y);
  std::vector<PathPoint> path;
  path.reserve(count);
  Vector warm;
  for (std::size_t i = 0; i < count; ++i) {
    LassoFit fit = (i == 0) ? solver.fit(grid.values[i], tol, max_iter)
                            : solver.fit_warm(warm, grid.values[i], tol, max_iter);
    warm = fit.beta;
    if (max_active >= 0 && fit.active_set.size() > static_cast<std::size_t>(max_active)) break;
    PathPoint pt;
    pt.lambda = fit.lambda;
    pt.active_set = fit.active_set;
    pt.rss = residual_sum_of_squares(X, y, fit.beta);
    pt.converged = fit.converged;
    pt.beta = std::move(fit.beta);
    path.push_back(std::move(pt));
  }
  return path;
}

SelectionOutcome select_cv(const DesignMatrix& X, const Vector& y, const LambdaGrid& grid,
                           int folds, std::uint64_t seed, int max_active) {
  check_design_response(X, y);
  check_grid(grid);
  const int n = static_cast<int>(X.n());
  if (folds < 2) throw InvalidFolds("cross validation needs at least two folds");
  if (folds > n) throw InvalidFolds("more folds than observations");

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  RngStream stream(substream_seed(seed, {label_id("cv")}));
  stream.shuffle(perm);

  const std::size_t g = grid.values.size();
  std::vector<double> curve(g, 0.0);
  std::size_t usable = g;  // grid prefix computed in every fold
  bool all_converged = true;

  int base = n / folds, rem = n % folds, start = 0;
  for (int f = 0; f < folds; ++f) {
    int size = base + (f < rem ? 1 : 0);
    std::vector<int> test(perm.begin() + start, perm.begin() + start + size);
    std::vector<int> train;
    train.reserve(static_cast<std::size_t>(n - size));
    train.insert(train.end(), perm.begin(), perm.begin() + start);
    train.insert(train.end(), perm.begin() + start + size, perm.end());
    start += size;
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    if (train.empty()) throw InvalidFolds("fold with zero training rows");

    DesignMatrix Xtr = subset_rows(X, train);
    Vector ytr(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) ytr[static_cast<Eigen::Index>(i)] = y[train[i]];
    Matrix Xte(static_cast<Eigen::Index>(test.size()), X.p());
    Vector yte(static_cast<Eigen::Index>(test.size()));
    for (std::size_t i = 0; i < test.size(); ++i) {
      Xte.row(static_cast<Eigen::Index>(i)) = X.values.row(test[i]);
      yte[static_cast<Eigen::Index>(i)] = y[test[i]];
    }

    auto path = lasso_path(Xtr, ytr, grid, LassoSolver::kDefaultTol, LassoSolver::kDefaultMaxIter,
                           -1, max_active);
    usable = std::min(usable, path.size());
    Matrix betas(X.p(), static_cast<Eigen::Index>(path.size()));
    for (std::size_t i = 0; i < path.size(); ++i) {
      betas.col(static_cast<Eigen::Index>(i)) = path[i].beta;
      all_converged = all_converged && path[i].converged;
    }
    Matrix pred = Xte * betas;
    for (std::size_t i = 0; i < path.size(); ++i) {
      double mse = (yte - pred.col(static_cast<Eigen::Index>(i))).squaredNorm() /
                   static_cast<double>(test.size());
      curve[i] += mse / static_cast<double>(folds);
    }
  }

  curve.resize(usable);
  std::size_t best = argmin_prefer_large_lambda(curve);
  auto full = lasso_path(X, y, grid, LassoSolver::kDefaultTol, LassoSolver::kDefaultMaxIter,
                         static_cast<int>(best));
  SelectionOutcome out = outcome_from_path_point("cv", X, y, full[best]);
  for (const auto& pt : full) all_converged = all_converged && pt.converged;
  out.converged = all_converged;
  out.diagnostics["cv_curve"] = curve;
  out.diagnostics["lambda_grid"] = grid.values;
  return out;
}

SelectionOutcome bic_from_path(const DesignMatrix& X, const Vector& y,
                               const std::vector<PathPoint>& path, const LambdaGrid& grid,
                               double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidConfig("noise scale must be positive");
  if (path.empty()) throw InvalidConfig("empty penalty path");
  const double n = static_cast<double>(X.n());
  const double sigma2 = sigma * sigma;
  std::vector<double> curve(path.size());
  std::vector<double> sizes(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    double k = static_cast<double>(path[i].active_set.size());
    curve[i] = n * std::log(kTwoPi * sigma2) + path[i].rss / sigma2 + k * std::log(n);
    sizes[i] = k;
  }
  std::size_t best = argmin_prefer_large_lambda(curve);
  SelectionOutcome out = outcome_from_path_point("bic", X, y, path[best]);
  for (const auto& pt : path) out.converged = out.converged && pt.converged;
  out.sigma_used = sigma;
  out.diagnostics["bic_curve"] = curve;
  out.diagnostics["support_sizes"] = sizes;
  out.diagnostics["lambda_grid"] = grid.values;
  return out;
}

SelectionOutcome sure_from_path(const DesignMatrix& X, const Vector& y,
                                const std::vector<PathPoint>& path, const LambdaGrid& grid,
                                double sigma, RankPolicy rank_policy) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidConfig("noise scale must be positive");
  if (path.empty()) throw InvalidConfig("empty penalty path");
  const double sigma2 = sigma * sigma;
  std::vector<double> curve(path.size());
  std::vector<double> ranks(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    int rank = active_rank(X, path[i].active_set, rank_policy);
    curve[i] = path[i].rss + 2.0 * sigma2 * static_cast<double>(rank);
    ranks[i] = static_cast<double>(rank);
  }
  std::size_t best = argmin_prefer_large_lambda(curve);
  SelectionOutcome out = outcome_from_path_point("sure", X, y, path[best]);
  for (const auto& pt : path) out.converged = out.converged && pt.converged;
  out.sigma_used = sigma;
  out.diagnostics["sure_curve"] = curve;
  out.diagnostics["active_ranks"] = ranks;
  out.diagnostics["lambda_grid"] = grid.values;
  return out;
}

SelectionOutcome select_bic(const DesignMatrix& X, const Vector& y, const LambdaGrid& grid,
                            double sigma, int max_active) {
  check_grid(grid);
  auto path = lasso_path(X, y, grid, LassoSolver::kDefaultTol, LassoSolver::kDefaultMaxIter, -1,
                         max_active);
  return bic_from_path(X, y, path, grid, sigma);
}

SelectionOutcome select_sure(const DesignMatrix& X, const Vector& y, const LambdaGrid& grid,
                             double sigma, RankPolicy rank_policy, int max_active) {
  check_grid(grid);
  auto path = lasso_path(X, y, grid, LassoSolver::kDefaultTol, LassoSolver::kDefaultMaxIter, -1,
                         max_active);
  return sure_from_path(X, y, path, grid, sigma, rank_policy);
}

double scaled_lasso_lambda0(int p) {
  if (p < 2) throw InvalidDimension("penalty multiplier needs at least two covariates");
  return std::sqrt(2.0 * std::log(static_cast<double>(p)));
}

SelectionOutcome select_scaled_lasso(const DesignMatrix& X, const Vector& y) {
  return select_scaled_lasso(X, y, scaled_lasso_lambda0(static_cast<int>(X.p())));
}

SelectionOutcome select_scaled_lasso(const DesignMatrix& X, const Vector& y, double lambda0,
                                     double a, double tol, int max_iter) {
  check_design_response(X, y);
  if (!(lambda0 > 0.0) || !std::isfinite(lambda0))
    throw InvalidConfig("penalty multiplier must be positive");
  if (!(a >= 0.0) || !(a < 1.0)) throw InvalidConfig("variance correction must lie in [0, 1)");
  if (!(tol > 0.0)) throw InvalidConfig("tolerance must be positive");
  if (max_iter < 1) throw InvalidConfig("need at least one alternation");

  const double n = static_cast<double>(X.n());
  const double denom = (1.0 - a) * n;
  const double collapse_floor = 1e-8;

  SelectionOutcome out;
  out.rule = "sl";
  double sigma = std::sqrt(y.squaredNorm() / denom);
  std::vector<double> trace;
  bool collapsed = false, converged = false;
  int alternations = 0;

  if (sigma < collapse_floor) {
    out.lambda = 0.0;
    out.support.clear();
    out.beta_refit = Vector::Zero(X.p());
    out.sigma_used = sigma;
    collapsed = true;
    converged = true;
  } else {
    LassoSolver solver(X);
    solver.set_response(y);
    Vector warm = Vector::Zero(X.p());
    LassoFit fit;
    for (alternations = 1; alternations <= max_iter; ++alternations) {
      // lambda0 is quoted on the unit-column-norm scale; the solver's
      // penalty acts on the raw sum-of-squares loss, so columns with unit
      // variance (norm ~ sqrt(N)) need the sqrt(N) factor to keep the
      // penalty at the null critical level. Without it the beta update
      // overfits and the scale estimate collapses to zero.
      double lam = sigma * lambda0 * std::sqrt(n);
      fit = solver.fit_warm(warm, lam);
      warm = fit.beta;
      double rss = residual_sum_of_squares(X, y, fit.beta);
      double sigma_new = std::sqrt(rss / denom);
      trace.push_back(sigma_new);
      if (sigma_new < collapse_floor) {
        sigma = sigma_new;
        collapsed = true;
        converged = true;
        break;
      }
      if (std::abs(sigma_new - sigma) < tol * sigma) {
        sigma = sigma_new;
        converged = true;
        break;
      }
      sigma = sigma_new;
    }
    alternations = std::min(alternations, max_iter);
    out.lambda = fit.lambda;
    out.support = fit.active_set;
    out.beta_refit = refit_least_squares(X, y, out.support);
    out.sigma_used = sigma;
    if (!fit.converged) converged = false;
  }

  out.converged = converged;
  out.diagnostics["sigma_trace"] = trace;
  out.diagnostics["alternations"] = {static_cast<double>(alternations)};
  out.diagnostics["collapsed"] = {collapsed ? 1.0 : 0.0};
  return out;
}

SelectionOutcome select_qut(const DesignMatrix& X, const Vector& y, double sigma, int mc_draws,
                            std::uint64_t seed, int threads) {
  check_design_response(X, y);
  NullQuantileEstimate est = qut_monte_carlo(X, sigma, mc_draws, seed, threads, false);
  LassoFit fit = fit_lasso(X, y, est.lambda_qut);
  SelectionOutcome out;
  out.rule = "qut";
  out.lambda = est.lambda_qut;
  out.support = fit.active_set;
  out.beta_refit = refit_least_squares(X, y, out.support);
  out.sigma_used = sigma;
  out.converged = fit.converged;
  out.diagnostics["lambda_qut"] = {est.lambda_qut};
  out.diagnostics["alpha"] = {est.alpha};
  out.diagnostics["null_quantile"] = {est.quantile};
  return out;
}

}  // namespace qut
