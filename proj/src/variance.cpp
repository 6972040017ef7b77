#include "qutlasso/variance.hpp"

#include "qutlasso/lasso.hpp"
#include "qutlasso/rng.hpp"
#include "qutlasso/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qut {

VarianceEstimate residual_variance(const DesignMatrix& X, const Vector& y, const Vector& beta,
                                   int k) {
  check_design_response(X, y);
  if (beta.size() != X.p()) throw DimensionMismatch("coefficient length does not match design");
  if (k < 0) throw InvalidConfig("degrees-of-freedom correction must be nonnegative");
  if (k >= X.n())
    throw DegreesOfFreedomExhausted("correction k = " + std::to_string(k) +
                                    " leaves no residual degrees of freedom");
  VarianceEstimate est;
  est.method = "residual";
  est.k_used = k;
  est.sigma2 = (y - X.values * beta).squaredNorm() / static_cast<double>(X.n() - k);
  return est;
}

namespace {

std::vector<int> select_half_support(const DesignMatrix& Xh, const Vector& yh,
                                     const RcvOptions& opts, std::uint64_t seed) {
  double lmax = lambda_max(Xh, yh);
  if (lmax <= 0.0) return {};
  if (opts.inner_selector == "cv") {
    LambdaGrid grid = make_lambda_grid(lmax, opts.grid_size, opts.grid_eps);
    int folds = std::min<int>(opts.cv_folds, static_cast<int>(Xh.n()));
    return select_cv(Xh, yh, grid, folds, seed, opts.max_active).support;
  }
  if (opts.inner_selector == "sl") return select_scaled_lasso(Xh, yh).support;
  throw InvalidConfig("unknown inner selector '" + opts.inner_selector + "'");
}

}  // namespace

VarianceEstimate rcv_variance(const DesignMatrix& X, const Vector& y, std::uint64_t seed,
                              const RcvOptions& opts) {
  check_design_response(X, y);
  const int n = static_cast<int>(X.n());
  if (n < 20) throw InsufficientData("refitted cross validation needs at least 20 rows");

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  RngStream stream(substream_seed(seed, {label_id("rcv")}));
  stream.shuffle(perm);
  std::vector<int> half[2];
  half[0].assign(perm.begin(), perm.begin() + n / 2);
  half[1].assign(perm.begin() + n / 2, perm.end());
  std::sort(half[0].begin(), half[0].end());
  std::sort(half[1].begin(), half[1].end());

  DesignMatrix Xh[2] = {subset_rows(X, half[0]), subset_rows(X, half[1])};
  Vector yh[2];
  for (int i = 0; i < 2; ++i) {
    yh[i].resize(static_cast<Eigen::Index>(half[i].size()));
    for (std::size_t r = 0; r < half[i].size(); ++r)
      yh[i][static_cast<Eigen::Index>(r)] = y[half[i][r]];
  }

  VarianceEstimate est;
  est.method = "rcv";
  est.k_used = -1;

  double sum = 0.0;
  for (int i = 0; i < 2; ++i) {
    std::vector<int> model = select_half_support(
        Xh[i], yh[i], opts, substream_seed(seed, {label_id("rcv_inner"), static_cast<std::uint64_t>(i)}));
    int other = 1 - i;
    int n_other = static_cast<int>(Xh[other].n());
    int k = static_cast<int>(model.size());
    Vector refit = refit_least_squares(Xh[other], yh[other], model);
    double rss = (yh[other] - Xh[other].values * refit).squaredNorm();
    if (k >= n_other) {
      est.dof_fallback = true;
      k = 0;
    }
    double s2 = rss / static_cast<double>(n_other - k);
    sum += s2;
    std::string tag = std::to_string(i + 1);
    est.details["k" + tag] = static_cast<double>(model.size());
    est.details["sigma2_" + tag] = s2;
    est.details["n" + tag] = static_cast<double>(static_cast<int>(Xh[i].n()));
  }
  est.sigma2 = 0.5 * sum;
  return est;
}

}  // namespace qut
