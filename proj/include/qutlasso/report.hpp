#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace qut {

struct ReportRow {
  std::vector<std::pair<std::string, double>> cell;  // cell coordinates, in order
  std::string rule;
  std::map<std::string, double> stats;                    // aggregates over replicates
  std::map<std::string, std::vector<double>> replicates;  // raw per-replicate series
};

struct ExperimentReport {
  std::string experiment;
  std::uint64_t seed = 0;
  int replications = 0;
  double runtime_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> config_echo;  // fully resolved config
  std::vector<ReportRow> rows;
};

std::string report_to_json(const ExperimentReport& r);
ExperimentReport report_from_json(const std::string& text);
void write_report_json(const ExperimentReport& r, const std::string& path);

/// One CSV row per (cell x rule) with the aggregate stats as columns.
void write_report_csv(const ExperimentReport& r, const std::string& path);

/// Summary table for the inversion runs: one row per rule, column groups
/// fdr/tpr/mse per snr value.
void write_selection_table_csv(const ExperimentReport& r, const std::string& path);

double median_of(std::vector<double> v);
double mean_of(const std::vector<double>& v);

/// Shortest text that parses back to exactly x (17 significant digits).
std::string format_sig17(double x);

}  // namespace qut
