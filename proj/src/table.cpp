#include "grcca/table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "grcca/errors.hpp"

namespace grcca {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

std::string format_number(const std::optional<double>& value) {
  return value ? format_number(*value) : std::string("NA");
}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw ShapeError("table row width does not match header");
  rows.push_back(std::move(row));
}

namespace {

void write_cell(std::ostream& out, const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) {
    out << cell;
    return;
  }
  out << '"';
  for (char c : cell) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void write_line(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    write_cell(out, cells[i]);
  }
  out << '\n';
}

}  // namespace

void write_csv(std::ostream& out, const Table& table) {
  write_line(out, table.header);
  for (const auto& row : table.rows) write_line(out, row);
}

void save_csv(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_csv(out, table);
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace grcca
