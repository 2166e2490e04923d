#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace txmotif {

// Minimal delimited-text reader with RFC 4180 quoting. A quoted field may
// contain the delimiter, doubled quotes, and line breaks.
class CsvReader {
public:
  explicit CsvReader(std::istream& in, char delimiter = ',')
      : in_(in), delim_(delimiter) {}

  // Reads the next row into `fields`. Returns false at end of input.
  bool next_row(std::vector<std::string>& fields) {
    fields.clear();
    std::string line;
    if (!std::getline(in_, line)) return false;
    ++line_;
    row_start_line_ = line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::string field;
    bool in_quotes = false;
    std::size_t i = 0;
    while (true) {
      if (i >= line.size()) {
        if (in_quotes) {
          // Quoted field spans a line break.
          if (!std::getline(in_, line)) break;
          ++line_;
          if (!line.empty() && line.back() == '\r') line.pop_back();
          field += '\n';
          i = 0;
          continue;
        }
        break;
      }
      char c = line[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            ++i;
          } else {
            in_quotes = false;
          }
        } else {
          field += c;
        }
      } else if (c == '"' && field.empty()) {
        in_quotes = true;
      } else if (c == delim_) {
        fields.push_back(std::move(field));
        field.clear();
      } else {
        field += c;
      }
      ++i;
    }
    fields.push_back(std::move(field));
    return true;
  }

  // 1-based line number where the most recent row started.
  std::size_t line() const { return row_start_line_; }

private:
  std::istream& in_;
  char delim_;
  std::size_t line_ = 0;
  std::size_t row_start_line_ = 0;
};

inline std::string csv_escape(const std::string& field, char delimiter = ',') {
  bool needs_quotes = false;
  for (char c : field) {
    if (c == delimiter || c == '"' || c == '\n' || c == '\r') {
      needs_quotes = true;
      break;
    }
  }
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields,
                          char delimiter = ',') {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << delimiter;
    out << csv_escape(fields[i], delimiter);
  }
  out << '\n';
}

}  // namespace txmotif
