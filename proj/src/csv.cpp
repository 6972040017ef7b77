#include "qutlasso/csv.hpp"

#include "qutlasso/report.hpp"
#include "qutlasso/types.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qut {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_number(const std::string& field, std::size_t line_no) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    throw InvalidConfig("line " + std::to_string(line_no) + ": '" + field + "' is not a number");
  }
  while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos]))) ++pos;
  if (pos != field.size())
    throw InvalidConfig("line " + std::to_string(line_no) + ": '" + field + "' is not a number");
  if (!std::isfinite(v))
    throw NonFiniteInput("line " + std::to_string(line_no) + ": non-finite value");
  return v;
}

}  // namespace

CsvTable read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open " + path);
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      table.columns = split_line(line);
      if (table.columns.size() == 1 && table.columns[0].empty())
        throw InvalidConfig(path + ": empty header row");
      continue;
    }
    if (line.empty() && in.eof()) break;
    auto fields = split_line(line);
    if (fields.size() != table.columns.size())
      throw InvalidConfig(path + " line " + std::to_string(line_no) + ": expected " +
                          std::to_string(table.columns.size()) + " fields, got " +
                          std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) row[i] = parse_number(fields[i], line_no);
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty()) throw InvalidConfig(path + ": empty file");
  if (table.rows.empty()) throw InvalidConfig(path + ": no data rows");
  return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw DimensionMismatch("row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_sig17(row[i]);
    out << "\n";
  }
}

}  // namespace qut
