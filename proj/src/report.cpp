#include "qutlasso/report.hpp"

#include "qutlasso/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>

namespace qut {

using json = nlohmann::ordered_json;

std::string format_sig17(double x) {
  // Shortest %g rendering that parses back to the same double. Scientific
  // hits first for magnitudes beyond the precision, so keep scanning for a
  // shorter fixed form (their length only grows with precision).
  char buf[40];
  std::string best;
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) != x) continue;
    if (best.empty() || std::strlen(buf) < best.size()) best = buf;
    if (best.find('e') == std::string::npos) break;
  }
  if (best.empty()) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    best = buf;
  }
  return best;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) throw InvalidDimension("mean of an empty series");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) throw InvalidDimension("median of an empty series");
  std::sort(v.begin(), v.end());
  std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::string report_to_json(const ExperimentReport& r) {
  json root;
  root["experiment"] = r.experiment;
  root["seed"] = r.seed;
  root["replications"] = r.replications;
  root["runtime_seconds"] = r.runtime_seconds;
  json cfg = json::object();
  for (const auto& [k, v] : r.config_echo) cfg[k] = v;
  root["config"] = cfg;
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr;
    json cell = json::array();
    for (const auto& [k, v] : row.cell) cell.push_back(json::array({k, v}));
    jr["cell"] = cell;
    jr["rule"] = row.rule;
    jr["stats"] = row.stats;
    jr["replicates"] = row.replicates;
    rows.push_back(std::move(jr));
  }
  root["rows"] = rows;
  return root.dump(2);
}

ExperimentReport report_from_json(const std::string& text) {
  json root = json::parse(text);
  ExperimentReport r;
  r.experiment = root.at("experiment").get<std::string>();
  r.seed = root.at("seed").get<std::uint64_t>();
  r.replications = root.at("replications").get<int>();
  r.runtime_seconds = root.at("runtime_seconds").get<double>();
  for (const auto& [k, v] : root.at("config").items())
    r.config_echo.emplace_back(k, v.get<std::string>());
  for (const auto& jr : root.at("rows")) {
    ReportRow row;
    for (const auto& c : jr.at("cell"))
      row.cell.emplace_back(c.at(0).get<std::string>(), c.at(1).get<double>());
    row.rule = jr.at("rule").get<std::string>();
    for (const auto& [k, v] : jr.at("stats").items()) row.stats[k] = v.get<double>();
    for (const auto& [k, v] : jr.at("replicates").items())
      row.replicates[k] = v.get<std::vector<double>>();
    r.rows.push_back(std::move(row));
  }
  return r;
}

void write_report_json(const ExperimentReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << report_to_json(r) << "\n";
}

void write_report_csv(const ExperimentReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);

  std::vector<std::string> cell_cols;
  if (!r.rows.empty())
    for (const auto& [k, v] : r.rows.front().cell) cell_cols.push_back(k);
  std::vector<std::string> stat_cols;
  std::set<std::string> seen;
  for (const auto& row : r.rows)
    for (const auto& [k, v] : row.stats)
      if (seen.insert(k).second) stat_cols.push_back(k);

  out << "experiment";
  for (const auto& c : cell_cols) out << "," << c;
  out << ",rule";
  for (const auto& c : stat_cols) out << "," << c;
  out << "\n";
  for (const auto& row : r.rows) {
    out << r.experiment;
    for (const auto& c : cell_cols) {
      auto it = std::find_if(row.cell.begin(), row.cell.end(),
                             [&](const auto& p) { return p.first == c; });
      out << ",";
      if (it != row.cell.end()) out << format_sig17(it->second);
    }
    out << "," << row.rule;
    for (const auto& c : stat_cols) {
      auto it = row.stats.find(c);
      out << ",";
      if (it != row.stats.end()) out << format_sig17(it->second);
    }
    out << "\n";
  }
}

void write_selection_table_csv(const ExperimentReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);

  std::vector<double> snrs;
  std::vector<std::string> rules;
  for (const auto& row : r.rows) {
    auto it = std::find_if(row.cell.begin(), row.cell.end(),
                           [](const auto& p) { return p.first == "snr"; });
    if (it == row.cell.end()) throw InvalidConfig("summary table needs an snr cell coordinate");
    if (std::find(snrs.begin(), snrs.end(), it->second) == snrs.end()) snrs.push_back(it->second);
    if (std::find(rules.begin(), rules.end(), row.rule) == rules.end()) rules.push_back(row.rule);
  }
  std::sort(snrs.begin(), snrs.end());

  auto label = [](double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", s);
    return std::string(buf);
  };

  out << "rule";
  for (double s : snrs)
    out << ",fdr_snr" << label(s) << ",tpr_snr" << label(s) << ",mse_snr" << label(s);
  out << "\n";
  for (const auto& rule : rules) {
    out << rule;
    for (double s : snrs) {
      const ReportRow* found = nullptr;
      for (const auto& row : r.rows) {
        if (row.rule != rule) continue;
        auto it = std::find_if(row.cell.begin(), row.cell.end(),
                               [](const auto& p) { return p.first == "snr"; });
        if (it != row.cell.end() && it->second == s) {
          found = &row;
          break;
        }
      }
      for (const char* stat : {"fdr", "tpr", "mse"}) {
        out << ",";
        if (found) {
          auto it = found->stats.find(stat);
          if (it != found->stats.end()) out << format_sig17(it->second);
        }
      }
    }
    out << "\n";
  }
}

}  // namespace qut
