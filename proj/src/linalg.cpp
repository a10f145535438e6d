#include "normforge/linalg.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace normforge {

Matrix read_csv_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      fail(ErrorKind::kIo, "read_csv_matrix: non-numeric cell in line: " + line);
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(ErrorKind::kDimensionMismatch, "read_csv_matrix: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorKind::kIo, "read_csv_matrix: no data rows");
  Matrix A(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) {
      A(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  if (!A.allFinite()) fail(ErrorKind::kNonFinite, "read_csv_matrix: non-finite entry");
  return A;
}

Matrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);
  return read_csv_matrix(in);
}

}  // namespace normforge
