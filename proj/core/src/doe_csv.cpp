#include <cctype>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "metais/errors.hpp"
#include "metais/kriging.hpp"

namespace metais {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& text, std::size_t row) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used == 0 || used != text.size()) {
    throw InputError("kriging", "DOE csv row " + std::to_string(row) + ": bad number '" + text + "'");
  }
  return value;
}

}  // namespace

void write_doe_csv(std::ostream& out, const DesignOfExperiments& doe) {
  for (int k = 0; k < doe.dimension(); ++k) out << 'x' << (k + 1) << ',';
  out << "g\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < doe.size(); ++i) {
    for (int k = 0; k < doe.dimension(); ++k) out << doe.points()(i, k) << ',';
    out << doe.values()[i] << '\n';
  }
}

void write_doe_csv(const std::string& path, const DesignOfExperiments& doe) {
  std::ofstream out(path);
  if (!out) throw InputError("kriging", "cannot open '" + path + "' for writing");
  write_doe_csv(out, doe);
}

DesignOfExperiments read_doe_csv(std::istream& in, double min_separation) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("kriging", "DOE csv is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() < 2) throw InputError("kriging", "DOE csv header needs >= 2 columns");
  for (const auto& name : header) {
    if (!name.empty() && (std::isdigit(static_cast<unsigned char>(name[0])) || name[0] == '-' ||
                          name[0] == '+' || name[0] == '.')) {
      throw InputError("kriging", "DOE csv header row is missing");
    }
  }
  const std::size_t cols = header.size();

  std::vector<double> cells;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto row = split_csv_line(line);
    if (row.size() != cols) {
      throw InputError("kriging", "DOE csv row " + std::to_string(rows + 1) + " has " +
                                      std::to_string(row.size()) + " cells, expected " +
                                      std::to_string(cols));
    }
    for (const auto& c : row) cells.push_back(parse_cell(c, rows + 1));
    ++rows;
  }
  const int n = static_cast<int>(cols - 1);
  Eigen::MatrixXd points(rows, n);
  Eigen::VectorXd values(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (int k = 0; k < n; ++k) points(i, k) = cells[i * cols + k];
    values[i] = cells[i * cols + n];
  }
  return DesignOfExperiments(std::move(points), std::move(values), min_separation);
}

DesignOfExperiments read_doe_csv(const std::string& path, double min_separation) {
  std::ifstream in(path);
  if (!in) throw InputError("kriging", "cannot open '" + path + "'");
  return read_doe_csv(in, min_separation);
}

}  // namespace metais
