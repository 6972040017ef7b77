#include <qutlasso/experiments.hpp>
#include <qutlasso/report.hpp>
#include <qutlasso/rng.hpp>
#include <qutlasso/types.hpp>

#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "oracles.hpp"

using namespace qut;

namespace {

std::string canonical(ExperimentReport r) {
  r.runtime_seconds = 0.0;  // wall time is the one nondeterministic field
  return report_to_json(r);
}

const ReportRow& find_row(const ExperimentReport& r, const std::string& rule, double snr) {
  for (const auto& row : r.rows) {
    if (row.rule != rule) continue;
    for (const auto& [k, v] : row.cell)
      if (k == "snr" && v == snr) return row;
  }
  REQUIRE(false);
  return r.rows.front();
}

SyntheticConfig small_synthetic() {
  SyntheticConfig cfg;
  cfg.n = 40;
  cfg.p = 60;
  cfg.omega = {0.0};
  cfg.theta = {0.4};
  cfg.snr = {4.0};
  cfg.sigma_source = "known";
  cfg.rules = {"qut"};
  cfg.replications = 3;
  cfg.seed = 91;
  cfg.qut_draws = 200;
  cfg.grid_size = 40;
  cfg.compute_oir = false;
  cfg.threads = 1;
  return cfg;
}

}  // namespace

TEST_CASE("identical configurations reproduce the synthetic report bit for bit") {
  SyntheticConfig cfg = small_synthetic();
  ExperimentReport a = run_synthetic(cfg);
  ExperimentReport b = run_synthetic(cfg);
  CHECK(canonical(a) == canonical(b));
  CHECK(a.experiment == "synthetic");
  CHECK(a.replications == 3);
}

TEST_CASE("each cell draws its own randomness regardless of neighbors") {
  SyntheticConfig solo = small_synthetic();
  SyntheticConfig both = small_synthetic();
  both.snr = {2.0, 4.0};
  ExperimentReport a = run_synthetic(solo);
  ExperimentReport b = run_synthetic(both);
  const ReportRow& alone = find_row(a, "qut", 4.0);
  const ReportRow& paired = find_row(b, "qut", 4.0);
  CHECK(alone.replicates == paired.replicates);
  CHECK(alone.stats == paired.stats);
}

TEST_CASE("aggregate statistics are the means and medians of the raw series") {
  ExperimentReport r = run_synthetic(small_synthetic());
  for (const auto& row : r.rows) {
    for (const auto& [name, series] : row.replicates) {
      if (name == "redraws") continue;  // carried raw, not aggregated
      CHECK(row.stats.at(name + "_mean") == mean_of(series));
      CHECK(row.stats.at(name + "_median") == median_of(series));
    }
  }
}

TEST_CASE("the sparsity exponent controls the advertised support size") {
  SyntheticConfig cfg = small_synthetic();
  cfg.n = 49;
  cfg.theta = {0.0, 0.3, 0.5};
  cfg.replications = 1;
  cfg.qut_draws = 100;
  ExperimentReport r = run_synthetic(cfg);
  std::vector<double> seen;
  for (const auto& row : r.rows)
    for (const auto& [k, v] : row.cell)
      if (k == "nonzeros") seen.push_back(v);
  // ceil(49^theta): 1, 4 (49^0.3 = 3.21), 7
  REQUIRE(seen.size() == 3);
  CHECK(seen[0] == 1.0);
  CHECK(seen[1] == 4.0);
  CHECK(seen[2] == 7.0);
}

TEST_CASE("the generator calibrates the signal energy to the requested ratio") {
  // Rebuild one replicate's draw stream and check the identity the scaling
  // is meant to enforce: beta' Sigma beta = snr * sigma^2.
  SyntheticConfig cfg = small_synthetic();
  cfg.omega = {0.3};
  cfg.snr = {2.5};
  cfg.sigma = 1.7;
  ExperimentReport r = run_synthetic(cfg);
  const double omega = 0.3, snr = 2.5, sigma = 1.7;
  const int s = static_cast<int>(std::ceil(std::pow(40.0, 0.4) - 1e-9));
  auto bits = [](double x) { return std::bit_cast<std::uint64_t>(x); };
  RngStream stream(substream_seed(cfg.seed, {label_id("synthetic"), bits(omega), bits(0.4),
                                             bits(snr), 0}));
  // skip the design draws: one shared normal plus p independent ones per row
  for (int i = 0; i < cfg.n * (cfg.p + 1); ++i) stream.normal();
  auto idx = stream.sample_without_replacement(cfg.p, s);
  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < s; ++t) {
    double v = stream.laplace();
    sum += v;
    sumsq += v * v;
  }
  double q = (1.0 - omega) * sumsq + omega * sum * sum;
  double scale = std::sqrt(snr * sigma * sigma / q);
  // beta' Sigma beta with Sigma = (1-omega) I + omega 11' on the support
  double energy = scale * scale * ((1.0 - omega) * sumsq + omega * sum * sum);
  CHECK(energy == doctest::Approx(snr * sigma * sigma).epsilon(1e-12));
  CHECK(r.rows.front().replicates.at("redraws")[0] == 0.0);
}

TEST_CASE("phase study reports per-cell recovery rates inside the unit interval") {
  PhaseTransitionConfig cfg;
  cfg.p = 40;
  cfg.n_grid = {20};
  cfg.rho_grid = {0.1, 0.5};
  cfg.replications = 2;
  cfg.seed = 17;
  cfg.qut_draws = 100;
  cfg.scan_grid_size = 50;
  cfg.selector_grid_size = 40;
  cfg.threads = 1;
  ExperimentReport a = run_phase_transition(cfg);
  ExperimentReport b = run_phase_transition(cfg);
  CHECK(canonical(a) == canonical(b));
  CHECK(a.experiment == "phase_transition");
  // one qut row and one scan row per cell; k = max(1, round(rho * 20))
  REQUIRE(a.rows.size() == 4);
  int qut_rows = 0, scan_rows = 0;
  for (const auto& row : a.rows) {
    double k = 0;
    for (const auto& [key, v] : row.cell)
      if (key == "k") k = v;
    CHECK((k == 2.0 || k == 10.0));
    if (row.rule == "qut") {
      ++qut_rows;
      for (const char* stat : {"inclusion_mean", "oir_mean", "tpr_mean", "fdr_mean"}) {
        CHECK(row.stats.at(stat) >= 0.0);
        CHECK(row.stats.at(stat) <= 1.0);
      }
    } else if (row.rule == "scan") {
      ++scan_rows;
      CHECK(row.stats.count("s_star_median") == 1);
      CHECK(row.stats.at("found_mean") >= 0.0);
    }
  }
  CHECK(qut_rows == 2);
  CHECK(scan_rows == 2);
}

TEST_CASE("phase study rejects unusable configurations") {
  PhaseTransitionConfig cfg;
  cfg.p = 40;
  cfg.n_grid = {20};
  cfg.rho_grid = {};
  CHECK_THROWS_AS(run_phase_transition(cfg), InvalidConfig);
  cfg.rho_grid = {-0.5};
  CHECK_THROWS_AS(run_phase_transition(cfg), InvalidConfig);
  cfg.rho_grid = {0.5};
  cfg.rules = {"mystery"};
  CHECK_THROWS_AS(run_phase_transition(cfg), InvalidConfig);
  cfg.rules = {"qut"};
  // a k above n is skipped, and skipping everything is an error
  cfg.k_policy[20] = {25};
  CHECK_THROWS_AS(run_phase_transition(cfg), InvalidConfig);
}

TEST_CASE("csv datasets split the named response from the covariates") {
  const std::string path = "dataset_tmp.csv";
  {
    std::ofstream out(path);
    out << "a,y,b\n1,10,4\n2,20,5\n3,30,6\n";
  }
  TabularDataset data = dataset_from_csv(path, "y");
  CHECK(data.response_name == "y");
  CHECK(data.covariate_names == std::vector<std::string>{"a", "b"});
  REQUIRE(data.x.rows() == 3);
  REQUIRE(data.x.cols() == 2);
  CHECK(data.y[1] == 20.0);
  CHECK(data.x(2, 0) == 3.0);
  CHECK(data.x(2, 1) == 6.0);
  CHECK_THROWS_AS(dataset_from_csv(path, "z"), InvalidConfig);
  std::remove(path.c_str());
  CHECK_THROWS_AS(dataset_from_csv(path, "y"), InvalidConfig);
}

TEST_CASE("split evaluation scores held-out risk for each rule") {
  RngStream stream(271);
  TabularDataset data;
  data.x = oracle::gaussian_matrix(60, 10, stream);
  data.y = data.x.col(2) * 3.0 + oracle::gaussian_vector(60, stream);
  for (int j = 0; j < 10; ++j) data.covariate_names.push_back("x" + std::to_string(j));
  data.response_name = "y";

  SplitEvalConfig cfg;
  cfg.repetitions = 3;
  cfg.rules = {"bic", "qut"};
  cfg.sigma_source = "known";
  cfg.sigma_known = 1.0;
  cfg.seed = 5;
  cfg.qut_draws = 200;
  cfg.grid_size = 40;
  cfg.threads = 1;
  ExperimentReport a = run_split_eval(data, cfg);
  ExperimentReport b = run_split_eval(data, cfg);
  CHECK(canonical(a) == canonical(b));
  CHECK(a.experiment == "split_eval");
  REQUIRE(a.rows.size() == 2);
  for (const auto& row : a.rows) {
    CHECK(row.replicates.at("risk").size() == 3);
    CHECK(row.stats.at("risk_mean") > 0.0);
    CHECK(row.stats.at("support_size_mean") >= 0.0);
  }
  // the strong covariate should be found, driving risk near the noise level
  CHECK(a.rows[0].stats.at("risk_median") < 4.0);
}

TEST_CASE("split evaluation rejects impossible splits") {
  RngStream stream(272);
  TabularDataset data;
  data.x = oracle::gaussian_matrix(50, 5, stream);
  data.y = oracle::gaussian_vector(50, stream);
  data.response_name = "y";
  for (int j = 0; j < 5; ++j) data.covariate_names.push_back("x" + std::to_string(j));

  SplitEvalConfig cfg;
  cfg.repetitions = 1;
  cfg.rules = {"bic"};
  cfg.sigma_source = "known";
  cfg.train_fraction = 0.0;
  CHECK_THROWS_AS(run_split_eval(data, cfg), InvalidConfig);
  cfg.train_fraction = 1.0;
  CHECK_THROWS_AS(run_split_eval(data, cfg), InvalidConfig);
  cfg.train_fraction = 0.2;  // 10 training rows is too few
  CHECK_THROWS_AS(run_split_eval(data, cfg), InsufficientData);
  cfg.train_fraction = 0.5;
  cfg.sigma_source = "other";
  CHECK_THROWS_AS(run_split_eval(data, cfg), InvalidConfig);
  cfg.sigma_source = "known";
  cfg.sigma_known = -1.0;
  CHECK_THROWS_AS(run_split_eval(data, cfg), InvalidConfig);
}

TEST_CASE("the short inversion entry point matches the configured one") {
  AbelExperimentConfig cfg;
  cfg.snr = {0.5};
  cfg.rules = {"bic"};
  cfg.replications = 1;
  cfg.seed = 7;
  cfg.threads = 1;
  ExperimentReport a = run_abel_experiment(cfg);
  ExperimentReport b = run_abel_experiment({0.5}, {"bic"}, 1, 7);
  CHECK(canonical(a) == canonical(b));
  CHECK(a.experiment == "abel");
  REQUIRE(a.rows.size() == 1);
  CHECK(a.rows.front().stats.count("mse_mean") == 1);
  CHECK(a.rows.front().stats.at("tpr_mean") >= 0.0);
  CHECK(a.rows.front().stats.at("fdr_mean") >= 0.0);
}
