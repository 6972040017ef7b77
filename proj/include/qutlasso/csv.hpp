#pragma once

#include <string>
#include <vector>

namespace qut {

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Strict numeric CSV: comma separated, one header row, '.' decimal, no
/// ragged rows, every body field a finite number.
CsvTable read_numeric_csv(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace qut
