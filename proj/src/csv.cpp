#include "fairsplit/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include "fairsplit/errors.hpp"

namespace fairsplit {

namespace {

// Splits one logical record. `line` has no trailing newline. Returns false
// if the record continues on the next physical line (open quote).
std::vector<std::string> split_record(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) {
    throw DataError("unterminated quoted field: " + line);
  }
  fields.push_back(std::move(field));
  return fields;
}

bool needs_quoting(const std::string& field, char delimiter) {
  return field.find(delimiter) != std::string::npos ||
         field.find('"') != std::string::npos ||
         field.find('\n') != std::string::npos;
}

void write_field(std::ostream& out, const std::string& field, char delimiter) {
  if (!needs_quoting(field, delimiter)) {
    out << field;
    return;
  }
  out << '"';
  for (const char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

Table read_delimited(std::istream& in, char delimiter) {
  Table table;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && !saw_header) continue;
    auto fields = split_record(line, delimiter);
    if (!saw_header) {
      table.header = std::move(fields);
      saw_header = true;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  if (!saw_header) {
    throw DataError("empty input: no header row");
  }
  return table;
}

void write_delimited(std::ostream& out, const Table& table, char delimiter) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i > 0) out << delimiter;
    write_field(out, table.header[i], delimiter);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << delimiter;
      write_field(out, row[i], delimiter);
    }
    out << '\n';
  }
}

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

}  // namespace fairsplit
