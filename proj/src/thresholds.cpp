#include "qutlasso/thresholds.hpp"

#include "qutlasso/parallel.hpp"
#include "qutlasso/rng.hpp"

#include <algorithm>
#include <cmath>

namespace qut {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double alpha_p(int p) {
  if (p < 2) throw InvalidDimension("probability level needs at least two covariates");
  return std::min(0.5, 1.0 / std::sqrt(kPi * std::log(static_cast<double>(p))));
}

double qut_l0_reference(double n) {
  if (!(n >= 2.0)) throw InvalidDimension("support-size penalty needs n >= 2");
  return 2.0 * std::log(n);
}

double upper_order_quantile(std::vector<double> samples, double q) {
  if (samples.empty()) throw TooFewReplicates("quantile of an empty sample");
  std::sort(samples.begin(), samples.end());
  const double m = static_cast<double>(samples.size());
  // 1e-9 guards against q*m landing a hair above an integer it should equal.
  long idx = static_cast<long>(std::ceil(q * m - 1e-9));
  idx = std::max(1l, std::min(static_cast<long>(samples.size()), idx));
  return samples[static_cast<std::size_t>(idx - 1)];
}

NullQuantileEstimate qut_monte_carlo(const DesignMatrix& X, double sigma, int m,
                                     std::uint64_t seed, int threads, bool keep_samples) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw InvalidConfig("noise scale must be finite and positive");
  if (m < 100) throw TooFewReplicates("Monte Carlo size must be at least 100");

  const Eigen::Index n = X.n();
  const double alpha = alpha_p(static_cast<int>(X.p()));
  const std::uint64_t family = label_id("qut_mc");

  std::vector<double> samples(static_cast<std::size_t>(m));
  const int chunk = 64;
  const std::size_t n_chunks = (static_cast<std::size_t>(m) + chunk - 1) / chunk;
  parallel_for(
      n_chunks,
      [&](std::size_t c) {
        const int lo = static_cast<int>(c) * chunk;
        const int hi = std::min(m, lo + chunk);
        Matrix y(n, hi - lo);
        for (int i = lo; i < hi; ++i) {
          RngStream stream(substream_seed(seed, {family, static_cast<std::uint64_t>(i)}));
          stream.fill_normal(y.col(i - lo).data(), static_cast<std::size_t>(n));
        }
        Matrix stat = X.values.transpose() * y;
        for (int i = lo; i < hi; ++i)
          samples[static_cast<std::size_t>(i)] = stat.col(i - lo).cwiseAbs().maxCoeff();
      },
      threads);

  NullQuantileEstimate est;
  est.alpha = alpha;
  est.m = m;
  est.seed = seed;
  est.sigma = sigma;
  est.quantile = upper_order_quantile(samples, 1.0 - alpha);
  est.lambda_qut = sigma * est.quantile;
  if (keep_samples) est.samples = std::move(samples);
  return est;
}

}  // namespace qut
