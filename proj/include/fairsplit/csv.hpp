#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fairsplit {

// Minimal delimited-text table. Quoted fields (RFC 4180 style, doubled
// quotes) are accepted on input; output quotes only when needed.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table read_delimited(std::istream& in, char delimiter = ',');
void write_delimited(std::ostream& out, const Table& table, char delimiter = ',');

// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double value);

}  // namespace fairsplit
