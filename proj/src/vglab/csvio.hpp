#pragma once
#include <string>
#include <vector>

namespace vglab {

// Round-trip-exact formatting for doubles (%.17g).
std::string fmt_double(double x);

// Minimal CSV (no quoting; fields must not contain commas or newlines).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);  // io_error
CsvTable read_csv(const std::string& path);                      // io_error

// Column lookup; throws io_error when the column is missing.
std::size_t csv_column(const CsvTable& table, const std::string& name);

double parse_double(const std::string& s);  // io_error on garbage

}  // namespace vglab
