#pragma once

#include "qutlasso/types.hpp"

#include <cstdint>
#include <vector>

namespace qut {

/// Null probability level 1/sqrt(pi ln P), clamped to at most 1/2.
double alpha_p(int p);

struct NullQuantileEstimate {
  double lambda_qut = 0.0;  // sigma times the null quantile
  double quantile = 0.0;    // unit-variance null quantile of ||X^T y||_inf
  double alpha = 0.0;
  int m = 0;
  std::uint64_t seed = 0;
  double sigma = 1.0;
  std::vector<double> samples;  // Monte Carlo draws in draw order (empty if not kept)
};

/// Monte Carlo null quantile of ||X^T y||_inf with y ~ N(0, I_N). The
/// (1 - alpha_P) empirical quantile is the order statistic at 1-based
/// position ceil((1-alpha)*m), no interpolation, which never understates
/// the exact order statistic; sigma scales the result. Draw i uses the
/// substream (seed, "qut_mc", i), so the estimate is bit-identical for a
/// given seed no matter how draws are chunked over threads.
NullQuantileEstimate qut_monte_carlo(const DesignMatrix& X, double sigma, int m,
                                     std::uint64_t seed, int threads = 0,
                                     bool keep_samples = true);

/// Shared quantile convention: sort ascending, take the order statistic at
/// 1-based position ceil(q*m).
double upper_order_quantile(std::vector<double> samples, double q);

/// Support-size penalty 2 ln n, strictly above the ln n penalty of the
/// classical information criterion for all n >= 2.
double qut_l0_reference(double n);

}  // namespace qut
