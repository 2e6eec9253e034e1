#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "csm/cli.hpp"
#include "csm/errors.hpp"

namespace csm::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

}  // namespace

std::ptrdiff_t CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return static_cast<std::ptrdiff_t>(j);
  return -1;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (table.header.empty()) {
      for (const auto& c : cells)
        if (c.empty()) throw InputError("empty column name in header", lineno);
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size())
      throw InputError("expected " + std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       lineno);
    table.rows.push_back(std::move(cells));
    table.lines.push_back(lineno);
  }
  if (table.header.empty()) throw InputError("empty CSV (no header row)");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return read_csv(in);
}

double parse_number(const std::string& cell, long line) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || *end != '\0') throw InputError("not a number: '" + cell + "'", line);
  return v;
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Eigen::MatrixXd read_observations(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t p = table.header.size();
  for (std::size_t j = 0; j < p; ++j) {
    if (table.header[j] != "y" + std::to_string(j + 1))
      throw InputError("missing or malformed header: expected y1,...,y" + std::to_string(p) + ", found '" +
                           table.header[j] + "'",
                       1);
  }
  if (table.rows.empty()) throw InputError("no data rows");
  Eigen::MatrixXd y(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const double v = parse_number(table.rows[i][j], table.lines[i]);
      if (!std::isfinite(v)) throw InputError("non-finite observation", table.lines[i]);
      y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return y;
}

std::vector<Eigen::MatrixXd> read_designs(const std::filesystem::path& path, Eigen::Index n, Eigen::Index p) {
  const CsvTable table = read_csv(path);
  const std::ptrdiff_t ci = table.column("i"), ck = table.column("row_k"), cj = table.column("col_j"),
                       cv = table.column("value");
  if (ci < 0 || ck < 0 || cj < 0 || cv < 0) throw InputError("design header must contain i,row_k,col_j,value", 1);

  struct Cell {
    long i, k, j;
    double v;
  };
  std::vector<Cell> cells;
  long q = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const long line = table.lines[r];
    const auto& row = table.rows[r];
    auto index = [&](std::ptrdiff_t c, long bound, const char* name) {
      const double v = parse_number(row[c], line);
      if (v != std::floor(v) || v < 1 || (bound > 0 && v > bound))
        throw InputError(std::string(name) + " out of range", line);
      return static_cast<long>(v);
    };
    Cell cell{index(ci, static_cast<long>(n), "i"), index(ck, static_cast<long>(p), "row_k"),
              index(cj, 0, "col_j"), parse_number(row[cv], line)};
    if (!std::isfinite(cell.v)) throw InputError("non-finite design value", line);
    q = std::max(q, cell.j);
    cells.push_back(cell);
  }
  if (q == 0) throw InputError("design file has no entries");
  std::vector<Eigen::MatrixXd> designs(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(p, q));
  for (const auto& c : cells) designs[c.i - 1](c.k - 1, c.j - 1) = c.v;
  return designs;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) out << (j ? "," : "") << cells[j];
    out << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace csm::cli
