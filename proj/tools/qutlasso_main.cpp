#include "qutlasso/csv.hpp"
#include "qutlasso/experiments.hpp"
#include "qutlasso/lasso.hpp"
#include "qutlasso/metrics.hpp"
#include "qutlasso/report.hpp"
#include "qutlasso/rng.hpp"
#include "qutlasso/selectors.hpp"
#include "qutlasso/thresholds.hpp"
#include "qutlasso/variance.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::ordered_json;
using namespace qut;

int default_threads() {
  const char* env = std::getenv("QUTLASSO_THREADS");
  if (!env || !*env) return 0;
  try {
    return std::max(0, std::stoi(env));
  } catch (...) {
    return 0;
  }
}

// Values carrying either a number or a keyword ("qut" for --lambda, "rcv"
// for --sigma).
std::optional<double> parse_number(const std::string& text) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (...) {
  }
  return std::nullopt;
}

Vector load_response(const std::string& path) {
  CsvTable t = read_numeric_csv(path);
  if (t.columns.size() != 1)
    throw InvalidConfig("response file must have exactly one column: " + path);
  Vector y(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) y[static_cast<Eigen::Index>(i)] = t.rows[i][0];
  return y;
}

Matrix load_matrix(const std::string& path) {
  CsvTable t = read_numeric_csv(path);
  Matrix x(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < t.columns.size(); ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.rows[i][j];
  return x;
}

DesignMatrix build_design(const std::string& path, bool do_standardize, bool center) {
  Matrix x = load_matrix(path);
  if (do_standardize) {
    StandardizeOptions opts;
    opts.center = center;
    return standardize(x, opts);
  }
  return DesignMatrix(std::move(x));
}

void emit(const ordered_json& j, const std::string& out_path) {
  std::string text = j.dump(2);
  if (out_path.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream os(out_path);
  if (!os) throw Error("cannot open output file " + out_path);
  os << text << "\n";
  if (!os) throw Error("failed writing " + out_path);
  std::cout << "wrote " << out_path << "\n";
}

void emit_report(const ExperimentReport& report, const std::string& out_path,
                 const std::string& csv_path) {
  if (!csv_path.empty()) {
    write_report_csv(report, csv_path);
    std::cout << "wrote " << csv_path << "\n";
  }
  if (out_path.empty()) {
    std::cout << report_to_json(report) << "\n";
  } else {
    write_report_json(report, out_path);
    std::cout << "wrote " << out_path << "\n";
  }
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Optional JSON config file; command-line flags win over file values.
struct JsonDefaults {
  CLI::App* cmd = nullptr;
  ordered_json j;
  bool loaded = false;

  void load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidConfig("cannot open config file " + path);
    try {
      is >> j;
    } catch (const std::exception& e) {
      throw InvalidConfig("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw InvalidConfig("config file " + path + " must hold a JSON object");
    loaded = true;
  }

  template <typename T>
  void apply(const std::string& flag, const std::string& key, T& target) const {
    if (!loaded || !j.contains(key) || cmd->count(flag) > 0) return;
    try {
      j.at(key).get_to(target);
    } catch (const std::exception& e) {
      throw InvalidConfig("config key '" + key + "': " + e.what());
    }
  }
};

double resolve_sigma(const std::string& text, const DesignMatrix& X, const Vector& y,
                     std::uint64_t seed, int folds, int grid_size, double grid_eps,
                     const std::string& inner, VarianceEstimate* detail_out) {
  if (text == "rcv") {
    RcvOptions opts;
    opts.inner_selector = inner;
    opts.cv_folds = folds;
    opts.grid_size = grid_size;
    opts.grid_eps = grid_eps;
    VarianceEstimate est = rcv_variance(X, y, substream_seed(seed, {label_id("cli_rcv")}), opts);
    if (detail_out) *detail_out = est;
    return std::sqrt(est.sigma2);
  }
  auto v = parse_number(text);
  if (!v || !(*v > 0.0)) throw InvalidConfig("--sigma must be a positive number or 'rcv'");
  return *v;
}

ordered_json diagnostics_json(const SelectionOutcome& out) {
  ordered_json d = ordered_json::object();
  for (const auto& [k, v] : out.diagnostics) d[k] = v;
  return d;
}

ordered_json outcome_json(const SelectionOutcome& out, const DesignMatrix& D) {
  ordered_json j;
  j["rule"] = out.rule;
  j["lambda"] = out.lambda;
  j["support"] = out.support;
  j["support_size"] = out.support.size();
  Vector beta = D.standardized ? to_original_scale(D, out.beta_refit) : out.beta_refit;
  j["coefficients"] = std::vector<double>(beta.data(), beta.data() + beta.size());
  if (std::isfinite(out.sigma_used)) j["sigma_used"] = out.sigma_used;
  j["converged"] = out.converged;
  j["diagnostics"] = diagnostics_json(out);
  return j;
}

int run_cli(int argc, char** argv) {
  CLI::App app{
      "qutlasso: sparse regression with the quantile universal threshold.\n"
      "Subcommands fit single models, compute thresholds, estimate noise, and\n"
      "run the bundled simulation studies."};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success, 1 usage error, 2 invalid configuration or data,\n"
      "3 runtime or I/O failure. Failures print a JSON error record to stderr.\n"
      "QUTLASSO_THREADS sets the default worker count (0 = all cores).\n"
      "--config loads defaults from a JSON object; explicit flags override it.");

  // ---- qut ----
  auto* qut_cmd = app.add_subcommand("qut", "Monte Carlo null threshold for a design matrix");
  struct {
    std::string design, out, config;
    double sigma = 1.0;
    int m = 1000;
    std::uint64_t seed = 1;
    int threads = default_threads();
    bool do_standardize = false, center = false;
  } qa;
  qut_cmd->add_option("--design", qa.design, "design matrix CSV (header row required)")
      ->required();
  qut_cmd->add_option("--sigma", qa.sigma, "noise standard deviation");
  qut_cmd->add_option("--m", qa.m, "Monte Carlo draws (at least 100)");
  qut_cmd->add_option("--seed", qa.seed, "random seed");
  qut_cmd->add_option("--threads", qa.threads, "worker threads (0 = all cores)");
  qut_cmd->add_flag("--standardize", qa.do_standardize, "scale columns to unit variance first");
  qut_cmd->add_flag("--center", qa.center, "also center columns (with --standardize)");
  qut_cmd->add_option("--out", qa.out, "write the JSON result here instead of stdout");
  qut_cmd->add_option("--config", qa.config, "JSON config file with the flags above as keys");
  qut_cmd->callback([&] {
    JsonDefaults cfg{qut_cmd};
    if (!qa.config.empty()) cfg.load(qa.config);
    cfg.apply("--design", "design", qa.design);
    cfg.apply("--sigma", "sigma", qa.sigma);
    cfg.apply("--m", "m", qa.m);
    cfg.apply("--seed", "seed", qa.seed);
    cfg.apply("--threads", "threads", qa.threads);
    cfg.apply("--standardize", "standardize", qa.do_standardize);
    cfg.apply("--center", "center", qa.center);

    DesignMatrix D = build_design(qa.design, qa.do_standardize, qa.center);
    NullQuantileEstimate est = qut_monte_carlo(D, qa.sigma, qa.m, qa.seed, qa.threads, false);
    ordered_json j;
    j["command"] = "qut";
    j["lambda_qut"] = est.lambda_qut;
    j["alpha"] = est.alpha;
    j["quantile"] = est.quantile;
    j["config"] = {{"design", qa.design},       {"sigma", qa.sigma},
                   {"m", qa.m},                 {"seed", qa.seed},
                   {"threads", qa.threads},     {"standardize", qa.do_standardize},
                   {"center", qa.center},       {"n", D.n()},
                   {"p", D.p()}};
    emit(j, qa.out);
  });

  // ---- fit ----
  auto* fit_cmd = app.add_subcommand("fit", "Single lasso fit at a fixed or QUT penalty");
  struct {
    std::string design, response, out, config;
    std::string lambda = "qut";
    std::string sigma = "1";
    int m = 1000;
    std::uint64_t seed = 1;
    double tol = 1e-7;
    int max_iter = 100000;
    int folds = 10;
    int grid_size = 100;
    double grid_eps = 1e-3;
    int threads = default_threads();
    bool do_standardize = false, center = false, refit = false;
  } fa;
  fit_cmd->add_option("--design", fa.design, "design matrix CSV")->required();
  fit_cmd->add_option("--response", fa.response, "response CSV (single column)")->required();
  fit_cmd->add_option("--lambda", fa.lambda, "penalty value, or 'qut' to compute it");
  fit_cmd->add_option("--sigma", fa.sigma, "noise level for --lambda qut: a number or 'rcv'");
  fit_cmd->add_option("--m", fa.m, "Monte Carlo draws for --lambda qut");
  fit_cmd->add_option("--seed", fa.seed, "random seed");
  fit_cmd->add_option("--tol", fa.tol, "solver tolerance");
  fit_cmd->add_option("--max-iter", fa.max_iter, "solver sweep limit");
  fit_cmd->add_option("--folds", fa.folds, "folds for --sigma rcv");
  fit_cmd->add_option("--grid-size", fa.grid_size, "penalty grid size for --sigma rcv");
  fit_cmd->add_option("--grid-eps", fa.grid_eps, "penalty grid depth for --sigma rcv");
  fit_cmd->add_option("--threads", fa.threads, "worker threads (0 = all cores)");
  fit_cmd->add_flag("--standardize", fa.do_standardize, "scale columns to unit variance first");
  fit_cmd->add_flag("--center", fa.center, "also center columns (with --standardize)");
  fit_cmd->add_flag("--refit", fa.refit, "report least-squares coefficients on the support");
  fit_cmd->add_option("--out", fa.out, "coefficients CSV (index, coefficient, selected)");
  fit_cmd->add_option("--config", fa.config, "JSON config file with the flags above as keys");
  fit_cmd->callback([&] {
    JsonDefaults cfg{fit_cmd};
    if (!fa.config.empty()) cfg.load(fa.config);
    cfg.apply("--design", "design", fa.design);
    cfg.apply("--response", "response", fa.response);
    cfg.apply("--lambda", "lambda", fa.lambda);
    cfg.apply("--sigma", "sigma", fa.sigma);
    cfg.apply("--m", "m", fa.m);
    cfg.apply("--seed", "seed", fa.seed);
    cfg.apply("--tol", "tol", fa.tol);
    cfg.apply("--max-iter", "max_iter", fa.max_iter);
    cfg.apply("--folds", "folds", fa.folds);
    cfg.apply("--grid-size", "grid_size", fa.grid_size);
    cfg.apply("--grid-eps", "grid_eps", fa.grid_eps);
    cfg.apply("--threads", "threads", fa.threads);
    cfg.apply("--standardize", "standardize", fa.do_standardize);
    cfg.apply("--center", "center", fa.center);
    cfg.apply("--refit", "refit", fa.refit);
    cfg.apply("--out", "out", fa.out);

    DesignMatrix D = build_design(fa.design, fa.do_standardize, fa.center);
    Vector y = load_response(fa.response);
    check_design_response(D, y);

    double sigma_value = std::numeric_limits<double>::quiet_NaN();
    double lambda_value;
    auto lam = parse_number(fa.lambda);
    if (lam) {
      if (!(*lam >= 0.0)) throw InvalidConfig("--lambda must be nonnegative or 'qut'");
      lambda_value = *lam;
    } else if (fa.lambda == "qut") {
      sigma_value = resolve_sigma(fa.sigma, D, y, fa.seed, fa.folds, fa.grid_size, fa.grid_eps,
                                  "cv", nullptr);
      lambda_value = qut_monte_carlo(D, sigma_value, fa.m,
                                     substream_seed(fa.seed, {label_id("cli_qut")}), fa.threads,
                                     false)
                         .lambda_qut;
    } else {
      throw InvalidConfig("--lambda must be a number or 'qut'");
    }

    LassoFit fit = fit_lasso(D, y, lambda_value, fa.tol, fa.max_iter);
    Vector coef = fa.refit ? refit_least_squares(D, y, fit.active_set) : fit.beta;
    if (D.standardized) coef = to_original_scale(D, coef);

    if (!fa.out.empty()) {
      std::vector<char> sel(static_cast<std::size_t>(D.p()), 0);
      for (int j : fit.active_set) sel[static_cast<std::size_t>(j)] = 1;
      std::vector<std::vector<double>> rows;
      for (Eigen::Index j = 0; j < D.p(); ++j)
        rows.push_back({static_cast<double>(j), coef[j],
                        static_cast<double>(sel[static_cast<std::size_t>(j)])});
      write_csv(fa.out, {"index", "coefficient", "selected"}, rows);
      std::cout << "wrote " << fa.out << "\n";
    }

    ordered_json j;
    j["command"] = "fit";
    j["lambda"] = lambda_value;
    if (std::isfinite(sigma_value)) j["sigma"] = sigma_value;
    j["support"] = fit.active_set;
    j["support_size"] = fit.active_set.size();
    j["objective"] = fit.objective;
    j["kkt_violation"] = fit.kkt_violation;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["refit"] = fa.refit;
    j["config"] = {{"design", fa.design},   {"response", fa.response},
                   {"lambda", fa.lambda},   {"sigma", fa.sigma},
                   {"m", fa.m},             {"seed", fa.seed},
                   {"tol", fa.tol},         {"max_iter", fa.max_iter},
                   {"standardize", fa.do_standardize}, {"center", fa.center},
                   {"threads", fa.threads}};
    std::cout << j.dump(2) << "\n";
  });

  // ---- select ----
  auto* sel_cmd = app.add_subcommand("select", "Model selection by one rule on one dataset");
  struct {
    std::string design, response, out, config;
    std::string rule = "qut";
    std::string sigma = "1";
    int folds = 10;
    int grid_size = 100;
    double grid_eps = 1e-3;
    int m = 1000;
    std::uint64_t seed = 1;
    int threads = default_threads();
    bool do_standardize = false, center = false;
  } sa;
  sel_cmd->add_option("--design", sa.design, "design matrix CSV")->required();
  sel_cmd->add_option("--response", sa.response, "response CSV (single column)")->required();
  sel_cmd->add_option("--rule", sa.rule, "qut, cv, bic, sure, or sl");
  sel_cmd->add_option("--sigma", sa.sigma, "noise level for qut/bic/sure: a number or 'rcv'");
  sel_cmd->add_option("--folds", sa.folds, "cross-validation folds");
  sel_cmd->add_option("--grid-size", sa.grid_size, "penalty grid size");
  sel_cmd->add_option("--grid-eps", sa.grid_eps, "penalty grid depth");
  sel_cmd->add_option("--m", sa.m, "Monte Carlo draws for the qut rule");
  sel_cmd->add_option("--seed", sa.seed, "random seed");
  sel_cmd->add_option("--threads", sa.threads, "worker threads (0 = all cores)");
  sel_cmd->add_flag("--standardize", sa.do_standardize, "scale columns to unit variance first");
  sel_cmd->add_flag("--center", sa.center, "also center columns (with --standardize)");
  sel_cmd->add_option("--out", sa.out, "write the JSON result here instead of stdout");
  sel_cmd->add_option("--config", sa.config, "JSON config file with the flags above as keys");
  sel_cmd->callback([&] {
    JsonDefaults cfg{sel_cmd};
    if (!sa.config.empty()) cfg.load(sa.config);
    cfg.apply("--design", "design", sa.design);
    cfg.apply("--response", "response", sa.response);
    cfg.apply("--rule", "rule", sa.rule);
    cfg.apply("--sigma", "sigma", sa.sigma);
    cfg.apply("--folds", "folds", sa.folds);
    cfg.apply("--grid-size", "grid_size", sa.grid_size);
    cfg.apply("--grid-eps", "grid_eps", sa.grid_eps);
    cfg.apply("--m", "m", sa.m);
    cfg.apply("--seed", "seed", sa.seed);
    cfg.apply("--threads", "threads", sa.threads);
    cfg.apply("--standardize", "standardize", sa.do_standardize);
    cfg.apply("--center", "center", sa.center);

    DesignMatrix D = build_design(sa.design, sa.do_standardize, sa.center);
    Vector y = load_response(sa.response);
    check_design_response(D, y);

    SelectionOutcome out;
    double sigma_value = std::numeric_limits<double>::quiet_NaN();
    if (sa.rule == "qut" || sa.rule == "bic" || sa.rule == "sure")
      sigma_value = resolve_sigma(sa.sigma, D, y, sa.seed, sa.folds, sa.grid_size, sa.grid_eps,
                                  "cv", nullptr);
    if (sa.rule == "qut") {
      out = select_qut(D, y, sigma_value, sa.m, substream_seed(sa.seed, {label_id("cli_qut")}),
                       sa.threads);
    } else if (sa.rule == "sl") {
      out = select_scaled_lasso(D, y);
    } else {
      double lmax = lambda_max(D, y);
      if (lmax <= 0.0) {
        out.rule = sa.rule;
        out.beta_refit = Vector::Zero(D.p());
      } else {
        LambdaGrid grid = make_lambda_grid(lmax, sa.grid_size, sa.grid_eps);
        if (sa.rule == "cv")
          out = select_cv(D, y, grid, sa.folds, substream_seed(sa.seed, {label_id("cli_cv")}));
        else if (sa.rule == "bic")
          out = bic_from_path(D, y, lasso_path(D, y, grid), grid, sigma_value);
        else if (sa.rule == "sure")
          out = sure_from_path(D, y, lasso_path(D, y, grid), grid, sigma_value,
                               RankPolicy::exact);
        else
          throw InvalidConfig("unknown selection rule '" + sa.rule + "'");
      }
    }

    ordered_json j = outcome_json(out, D);
    j["command"] = "select";
    j["config"] = {{"design", sa.design},       {"response", sa.response},
                   {"rule", sa.rule},           {"sigma", sa.sigma},
                   {"folds", sa.folds},         {"grid_size", sa.grid_size},
                   {"grid_eps", sa.grid_eps},   {"m", sa.m},
                   {"seed", sa.seed},           {"standardize", sa.do_standardize},
                   {"center", sa.center},       {"threads", sa.threads}};
    emit(j, sa.out);
  });

  // ---- variance ----
  auto* var_cmd = app.add_subcommand("variance", "Noise variance estimation");
  struct {
    std::string design, response, out, config;
    std::string method = "rcv";
    std::string inner = "cv";
    std::vector<int> support;
    int folds = 10;
    int grid_size = 100;
    double grid_eps = 1e-3;
    std::uint64_t seed = 1;
    bool do_standardize = false, center = false;
  } va;
  var_cmd->add_option("--design", va.design, "design matrix CSV")->required();
  var_cmd->add_option("--response", va.response, "response CSV (single column)")->required();
  var_cmd->add_option("--method", va.method, "rcv, or residual (needs --support)");
  var_cmd->add_option("--support", va.support, "column indices for the residual method")
      ->delimiter(',');
  var_cmd->add_option("--inner", va.inner, "rcv inner selector: cv or sl");
  var_cmd->add_option("--folds", va.folds, "folds for the rcv inner selector");
  var_cmd->add_option("--grid-size", va.grid_size, "penalty grid size for rcv");
  var_cmd->add_option("--grid-eps", va.grid_eps, "penalty grid depth for rcv");
  var_cmd->add_option("--seed", va.seed, "random seed for the rcv split");
  var_cmd->add_flag("--standardize", va.do_standardize, "scale columns to unit variance first");
  var_cmd->add_flag("--center", va.center, "also center columns (with --standardize)");
  var_cmd->add_option("--out", va.out, "write the JSON result here instead of stdout");
  var_cmd->add_option("--config", va.config, "JSON config file with the flags above as keys");
  var_cmd->callback([&] {
    JsonDefaults cfg{var_cmd};
    if (!va.config.empty()) cfg.load(va.config);
    cfg.apply("--design", "design", va.design);
    cfg.apply("--response", "response", va.response);
    cfg.apply("--method", "method", va.method);
    cfg.apply("--support", "support", va.support);
    cfg.apply("--inner", "inner", va.inner);
    cfg.apply("--folds", "folds", va.folds);
    cfg.apply("--grid-size", "grid_size", va.grid_size);
    cfg.apply("--grid-eps", "grid_eps", va.grid_eps);
    cfg.apply("--seed", "seed", va.seed);
    cfg.apply("--standardize", "standardize", va.do_standardize);
    cfg.apply("--center", "center", va.center);

    DesignMatrix D = build_design(va.design, va.do_standardize, va.center);
    Vector y = load_response(va.response);
    check_design_response(D, y);

    VarianceEstimate est;
    if (va.method == "residual") {
      Vector beta = refit_least_squares(D, y, va.support);
      est = residual_variance(D, y, beta, static_cast<int>(va.support.size()));
    } else if (va.method == "rcv") {
      RcvOptions opts;
      opts.inner_selector = va.inner;
      opts.cv_folds = va.folds;
      opts.grid_size = va.grid_size;
      opts.grid_eps = va.grid_eps;
      est = rcv_variance(D, y, va.seed, opts);
    } else {
      throw InvalidConfig("unknown variance method '" + va.method + "'");
    }

    ordered_json j;
    j["command"] = "variance";
    j["sigma2"] = est.sigma2;
    j["sigma"] = std::sqrt(est.sigma2);
    j["method"] = est.method;
    j["k_used"] = est.k_used;
    j["dof_fallback"] = est.dof_fallback;
    j["details"] = est.details;
    j["config"] = {{"design", va.design},   {"response", va.response},
                   {"method", va.method},   {"support", va.support},
                   {"inner", va.inner},     {"folds", va.folds},
                   {"grid_size", va.grid_size}, {"grid_eps", va.grid_eps},
                   {"seed", va.seed},       {"standardize", va.do_standardize},
                   {"center", va.center}};
    emit(j, va.out);
  });

  // ---- phase ----
  auto* phase_cmd = app.add_subcommand("phase", "Support recovery over a sample-size/sparsity grid");
  PhaseTransitionConfig pc;
  pc.threads = default_threads();
  struct {
    std::string out, csv, config;
  } pa;
  phase_cmd->add_option("--p", pc.p, "number of covariates");
  phase_cmd->add_option("--n-grid", pc.n_grid, "sample sizes")->delimiter(',');
  phase_cmd->add_option("--rho-grid", pc.rho_grid, "sparsity fractions k/n")->delimiter(',');
  phase_cmd->add_option("--amplitude", pc.signal_amplitude, "signal amplitude in sigma units");
  phase_cmd->add_option("--sigma", pc.sigma, "known noise level");
  phase_cmd->add_option("--rules", pc.rules, "selection rules to run")->delimiter(',');
  phase_cmd->add_option("--reps", pc.replications, "replicates per cell");
  phase_cmd->add_option("--seed", pc.seed, "random seed");
  phase_cmd->add_option("--qut-draws", pc.qut_draws, "Monte Carlo draws per threshold");
  phase_cmd->add_option("--scan-grid-size", pc.scan_grid_size, "oracle scan grid size");
  phase_cmd->add_option("--scan-grid-eps", pc.scan_grid_eps, "oracle scan grid depth");
  phase_cmd->add_option("--grid-size", pc.selector_grid_size, "selector grid size");
  phase_cmd->add_option("--grid-eps", pc.selector_grid_eps, "selector grid depth");
  phase_cmd->add_option("--folds", pc.cv_folds, "cross-validation folds");
  phase_cmd->add_option("--threads", pc.threads, "worker threads (0 = all cores)");
  phase_cmd->add_option("--out", pa.out, "report JSON path (stdout when absent)");
  phase_cmd->add_option("--csv", pa.csv, "also write a flat per-cell CSV here");
  phase_cmd->add_option("--config", pa.config, "JSON config file with the flags above as keys");
  phase_cmd->callback([&] {
    JsonDefaults cfg{phase_cmd};
    if (!pa.config.empty()) cfg.load(pa.config);
    cfg.apply("--p", "p", pc.p);
    cfg.apply("--n-grid", "n_grid", pc.n_grid);
    cfg.apply("--rho-grid", "rho_grid", pc.rho_grid);
    cfg.apply("--amplitude", "amplitude", pc.signal_amplitude);
    cfg.apply("--sigma", "sigma", pc.sigma);
    cfg.apply("--rules", "rules", pc.rules);
    cfg.apply("--reps", "reps", pc.replications);
    cfg.apply("--seed", "seed", pc.seed);
    cfg.apply("--qut-draws", "qut_draws", pc.qut_draws);
    cfg.apply("--scan-grid-size", "scan_grid_size", pc.scan_grid_size);
    cfg.apply("--scan-grid-eps", "scan_grid_eps", pc.scan_grid_eps);
    cfg.apply("--grid-size", "grid_size", pc.selector_grid_size);
    cfg.apply("--grid-eps", "grid_eps", pc.selector_grid_eps);
    cfg.apply("--folds", "folds", pc.cv_folds);
    cfg.apply("--threads", "threads", pc.threads);
    if (cfg.loaded && cfg.j.contains("k_policy")) {
      for (const auto& [key, value] : cfg.j.at("k_policy").items())
        pc.k_policy[std::stoi(key)] = value.get<std::vector<int>>();
    }
    emit_report(run_phase_transition(pc), pa.out, pa.csv);
  });

  // ---- synthetic ----
  auto* syn_cmd = app.add_subcommand("synthetic", "Selector comparison on correlated designs");
  SyntheticConfig sc;
  sc.threads = default_threads();
  struct {
    std::string out, csv, config;
    bool no_oir = false;
  } ya;
  syn_cmd->add_option("--n", sc.n, "sample size");
  syn_cmd->add_option("--p", sc.p, "number of covariates");
  syn_cmd->add_option("--omega", sc.omega, "equicorrelation levels")->delimiter(',');
  syn_cmd->add_option("--theta", sc.theta, "sparsity exponents (support ceil(n^theta))")
      ->delimiter(',');
  syn_cmd->add_option("--snr", sc.snr, "signal-to-noise ratios")->delimiter(',');
  syn_cmd->add_option("--sigma", sc.sigma, "true noise level");
  syn_cmd->add_option("--sigma-source", sc.sigma_source, "rcv or known, for qut/bic/sure");
  syn_cmd->add_option("--rules", sc.rules, "selection rules to run")->delimiter(',');
  syn_cmd->add_option("--reps", sc.replications, "replicates per cell");
  syn_cmd->add_option("--seed", sc.seed, "random seed");
  syn_cmd->add_option("--qut-draws", sc.qut_draws, "Monte Carlo draws per threshold");
  syn_cmd->add_option("--grid-size", sc.grid_size, "penalty grid size");
  syn_cmd->add_option("--grid-eps", sc.grid_eps, "penalty grid depth");
  syn_cmd->add_option("--folds", sc.cv_folds, "cross-validation folds");
  syn_cmd->add_flag("--no-oir", ya.no_oir, "skip the oracle scan");
  syn_cmd->add_option("--scan-grid-size", sc.scan_grid_size, "oracle scan grid size");
  syn_cmd->add_option("--threads", sc.threads, "worker threads (0 = all cores)");
  syn_cmd->add_option("--out", ya.out, "report JSON path (stdout when absent)");
  syn_cmd->add_option("--csv", ya.csv, "also write a flat per-cell CSV here");
  syn_cmd->add_option("--config", ya.config, "JSON config file with the flags above as keys");
  syn_cmd->callback([&] {
    JsonDefaults cfg{syn_cmd};
    if (!ya.config.empty()) cfg.load(ya.config);
    cfg.apply("--n", "n", sc.n);
    cfg.apply("--p", "p", sc.p);
    cfg.apply("--omega", "omega", sc.omega);
    cfg.apply("--theta", "theta", sc.theta);
    cfg.apply("--snr", "snr", sc.snr);
    cfg.apply("--sigma", "sigma", sc.sigma);
    cfg.apply("--sigma-source", "sigma_source", sc.sigma_source);
    cfg.apply("--rules", "rules", sc.rules);
    cfg.apply("--reps", "reps", sc.replications);
    cfg.apply("--seed", "seed", sc.seed);
    cfg.apply("--qut-draws", "qut_draws", sc.qut_draws);
    cfg.apply("--grid-size", "grid_size", sc.grid_size);
    cfg.apply("--grid-eps", "grid_eps", sc.grid_eps);
    cfg.apply("--folds", "folds", sc.cv_folds);
    cfg.apply("--no-oir", "no_oir", ya.no_oir);
    cfg.apply("--scan-grid-size", "scan_grid_size", sc.scan_grid_size);
    cfg.apply("--threads", "threads", sc.threads);
    sc.compute_oir = !ya.no_oir;
    emit_report(run_synthetic(sc), ya.out, ya.csv);
  });

  // ---- split-eval ----
  auto* split_cmd = app.add_subcommand("split-eval", "Train/test evaluation on a tabular dataset");
  SplitEvalConfig ec;
  ec.threads = default_threads();
  struct {
    std::string data, response_col = "y", out, csv, config;
  } ea;
  split_cmd->add_option("--data", ea.data, "dataset CSV with the response as a named column")
      ->required();
  split_cmd->add_option("--response-col", ea.response_col, "response column name");
  split_cmd->add_option("--train-fraction", ec.train_fraction, "fraction of rows for training");
  split_cmd->add_option("--reps", ec.repetitions, "number of random splits");
  split_cmd->add_option("--rules", ec.rules, "selection rules to run")->delimiter(',');
  split_cmd->add_option("--sigma-source", ec.sigma_source, "rcv or known, for qut/bic/sure");
  split_cmd->add_option("--sigma", ec.sigma_known, "noise level when --sigma-source known");
  split_cmd->add_flag("--center", ec.center, "center training columns before scaling");
  split_cmd->add_option("--seed", ec.seed, "random seed");
  split_cmd->add_option("--qut-draws", ec.qut_draws, "Monte Carlo draws per threshold");
  split_cmd->add_option("--grid-size", ec.grid_size, "penalty grid size");
  split_cmd->add_option("--grid-eps", ec.grid_eps, "penalty grid depth");
  split_cmd->add_option("--folds", ec.cv_folds, "cross-validation folds");
  split_cmd->add_option("--threads", ec.threads, "worker threads (0 = all cores)");
  split_cmd->add_option("--out", ea.out, "report JSON path (stdout when absent)");
  split_cmd->add_option("--csv", ea.csv, "also write a flat per-rule CSV here");
  split_cmd->add_option("--config", ea.config, "JSON config file with the flags above as keys");
  split_cmd->callback([&] {
    JsonDefaults cfg{split_cmd};
    if (!ea.config.empty()) cfg.load(ea.config);
    cfg.apply("--data", "data", ea.data);
    cfg.apply("--response-col", "response_col", ea.response_col);
    cfg.apply("--train-fraction", "train_fraction", ec.train_fraction);
    cfg.apply("--reps", "reps", ec.repetitions);
    cfg.apply("--rules", "rules", ec.rules);
    cfg.apply("--sigma-source", "sigma_source", ec.sigma_source);
    cfg.apply("--sigma", "sigma", ec.sigma_known);
    cfg.apply("--center", "center", ec.center);
    cfg.apply("--seed", "seed", ec.seed);
    cfg.apply("--qut-draws", "qut_draws", ec.qut_draws);
    cfg.apply("--grid-size", "grid_size", ec.grid_size);
    cfg.apply("--grid-eps", "grid_eps", ec.grid_eps);
    cfg.apply("--folds", "folds", ec.cv_folds);
    cfg.apply("--threads", "threads", ec.threads);
    TabularDataset data = dataset_from_csv(ea.data, ea.response_col);
    emit_report(run_split_eval(data, ec), ea.out, ea.csv);
  });

  // ---- abel ----
  auto* abel_cmd = app.add_subcommand("abel", "Sparse wavelet inversion of noisy projection data");
  AbelExperimentConfig ac;
  ac.threads = default_threads();
  struct {
    std::string out, report, config;
  } aa;
  abel_cmd->add_option("--n", ac.n, "grid size (power of two)");
  abel_cmd->add_option("--r-max", ac.r_max, "outer radius");
  abel_cmd->add_option("--snr", ac.snr, "signal-to-noise ratios")->delimiter(',');
  abel_cmd->add_option("--rules", ac.rules, "selection rules: qut, bic, sure")->delimiter(',');
  abel_cmd->add_option("--reps", ac.replications, "replicates per snr");
  abel_cmd->add_option("--seed", ac.seed, "random seed");
  abel_cmd->add_option("--qut-draws", ac.qut_draws, "Monte Carlo draws for the threshold");
  abel_cmd->add_option("--grid-size", ac.grid_size, "penalty grid size for bic/sure");
  abel_cmd->add_option("--grid-eps", ac.grid_eps, "penalty grid depth for bic/sure");
  abel_cmd->add_option("--mse-domain", ac.mse_domain,
                       "error convention: coef_sum, coef_mean, signal_sum, signal_mean");
  abel_cmd->add_option("--threads", ac.threads, "worker threads (0 = all cores)");
  abel_cmd->add_option("--out", aa.out,
                       "output path; .csv gets the summary table, anything else the report JSON");
  abel_cmd->add_option("--report", aa.report, "also write the full report JSON here");
  abel_cmd->add_option("--config", aa.config, "JSON config file with the flags above as keys");
  abel_cmd->callback([&] {
    JsonDefaults cfg{abel_cmd};
    if (!aa.config.empty()) cfg.load(aa.config);
    cfg.apply("--n", "n", ac.n);
    cfg.apply("--r-max", "r_max", ac.r_max);
    cfg.apply("--snr", "snr", ac.snr);
    cfg.apply("--rules", "rules", ac.rules);
    cfg.apply("--reps", "reps", ac.replications);
    cfg.apply("--seed", "seed", ac.seed);
    cfg.apply("--qut-draws", "qut_draws", ac.qut_draws);
    cfg.apply("--grid-size", "grid_size", ac.grid_size);
    cfg.apply("--grid-eps", "grid_eps", ac.grid_eps);
    cfg.apply("--mse-domain", "mse_domain", ac.mse_domain);
    cfg.apply("--threads", "threads", ac.threads);
    ExperimentReport report = run_abel_experiment(ac);
    if (!aa.report.empty()) {
      write_report_json(report, aa.report);
      std::cout << "wrote " << aa.report << "\n";
    }
    if (aa.out.empty()) {
      std::cout << report_to_json(report) << "\n";
    } else if (ends_with(aa.out, ".csv")) {
      write_selection_table_csv(report, aa.out);
      std::cout << "wrote " << aa.out << "\n";
    } else {
      write_report_json(report, aa.out);
      std::cout << "wrote " << aa.out << "\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    ordered_json err;
    err["error"] = {{"exit_code", 1}, {"category", "usage"}, {"message", e.what()}};
    std::cerr << err.dump(2) << "\n";
    return 1;
  }
  return 0;
}

int classify_exception(const std::exception& e) {
  if (dynamic_cast<const InvalidConfig*>(&e) || dynamic_cast<const InvalidDimension*>(&e) ||
      dynamic_cast<const DimensionMismatch*>(&e) || dynamic_cast<const NonFiniteInput*>(&e) ||
      dynamic_cast<const InvalidFolds*>(&e) || dynamic_cast<const InvalidSize*>(&e) ||
      dynamic_cast<const TooFewReplicates*>(&e) || dynamic_cast<const InsufficientData*>(&e) ||
      dynamic_cast<const DegreesOfFreedomExhausted*>(&e))
    return 2;
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    int code = classify_exception(e);
    ordered_json err;
    err["error"] = {{"exit_code", code},
                    {"category", code == 2 ? "config" : "runtime"},
                    {"message", e.what()}};
    std::cerr << err.dump(2) << "\n";
    return code;
  }
}
