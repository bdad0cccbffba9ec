#pragma once

#include <string>
#include <vector>

namespace mtpath {

// Dialect: comma, UTF-8, header row, "." decimal, minimal RFC 4180 quoting,
// no embedded newlines in fields.

std::string csv_escape(const std::string& field);
std::vector<std::string> csv_split(const std::string& line);

// Shortest representation that round-trips bitwise (std::to_chars).
std::string format_double(double v);
double parse_double(const std::string& s);  // throws SchemaError on junk

std::string join_csv_row(const std::vector<std::string>& fields);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);
void write_csv(const CsvTable& t, const std::string& path);

}  // namespace mtpath
