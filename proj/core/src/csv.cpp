#include "coopfe/csv.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "coopfe/errors.hpp"

namespace coopfe {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) {
      throw DataError("cannot create directory '" + p.parent_path().string() +
                      "': " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  auto write_row = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  write_row(header);
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      throw DataError("write_csv: row width differs from header in '" + path +
                      "'");
    }
    write_row(row);
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      cells.push_back(cell);
    }
    if (!s.empty() && s.back() == ',') cells.push_back("");
    return cells;
  };
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  table.header = split(line);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells = split(line);
    if (cells.size() != table.header.size()) {
      throw DataError("'" + path + "' line " + std::to_string(line_no) +
                      ": expected " + std::to_string(table.header.size()) +
                      " cells, got " + std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

void write_set_function(const std::string& path,
                        const CharacteristicFunction& f) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(f.values.size());
  for (Mask m = 0; m < static_cast<Mask>(f.values.size()); ++m) {
    rows.push_back({std::to_string(m), format_double(f.values[m])});
  }
  write_csv(path, {"mask", "value"}, rows);
}

CharacteristicFunction read_set_function(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header != std::vector<std::string>{"mask", "value"}) {
    throw SchemaError("'" + path + "': expected header mask,value");
  }
  if (table.rows.empty()) throw DataError("'" + path + "': no rows");
  std::vector<double> values(table.rows.size(),
                             std::numeric_limits<double>::quiet_NaN());
  for (const auto& row : table.rows) {
    const std::size_t mask = std::stoul(row[0]);
    if (mask >= values.size()) {
      throw DataError("'" + path + "': mask " + row[0] +
                      " outside a dense 2^N table");
    }
    values[mask] = std::stod(row[1]);
  }
  int n = 0;
  while ((std::size_t{1} << n) < values.size()) ++n;
  if ((std::size_t{1} << n) != values.size()) {
    throw DataError("'" + path + "': row count is not a power of two");
  }
  for (double v : values) {
    if (std::isnan(v)) throw DataError("'" + path + "': missing mask rows");
  }
  return make_characteristic(n, std::move(values));
}

}  // namespace coopfe
