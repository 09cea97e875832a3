#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace grcca {

/// Shortest decimal text that parses back to the same double. Non-finite
/// values print as inf, -inf and nan.
std::string format_number(double value);
/// Missing values print as NA.
std::string format_number(const std::optional<double>& value);

/// A rectangular table of already formatted cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

/// RFC-4180 output: cells containing a comma, quote or line break are quoted.
/// Lines end in '\n'.
void write_csv(std::ostream& out, const Table& table);
void save_csv(const std::filesystem::path& path, const Table& table);

}  // namespace grcca
