#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kpn/sample_set.hpp"

namespace kpn {

namespace csv_detail {

inline bool parse_double(std::string_view field, double& out) {
  // trim surrounding whitespace
  size_t b = field.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return false;
  size_t e = field.find_last_not_of(" \t\r");
  field = field.substr(b, e - b + 1);
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

inline std::vector<std::string_view> split_fields(std::string_view line,
                                                  std::vector<std::string_view>& out) {
  out.clear();
  size_t start = 0;
  for (size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace csv_detail

/// Reads a sample matrix from CSV: rows are samples, columns are
/// dimensions. A single leading header row is skipped when its first
/// field is not numeric. Ragged rows and non-numeric cells are errors
/// that name the offending line.
inline SampleSet read_sample_csv(std::istream& in) {
  std::vector<double> data;
  std::string line;
  std::vector<std::string_view> fields;
  int cols = -1;
  int rows = 0;
  long line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    csv_detail::split_fields(line, fields);
    if (first_content_line) {
      double probe;
      if (!csv_detail::parse_double(fields[0], probe)) {
        first_content_line = false;  // header row
        continue;
      }
    }
    first_content_line = false;
    if (cols < 0) {
      cols = static_cast<int>(fields.size());
    } else if (static_cast<int>(fields.size()) != cols) {
      throw std::runtime_error("csv: ragged row at line " + std::to_string(line_no) +
                               " (expected " + std::to_string(cols) + " columns)");
    }
    for (const auto f : fields) {
      double v;
      if (!csv_detail::parse_double(f, v))
        throw std::runtime_error("csv: non-numeric cell at line " + std::to_string(line_no));
      data.push_back(v);
    }
    ++rows;
  }
  if (rows < 2 || cols < 1) throw std::runtime_error("csv: need at least two sample rows");
  return SampleSet(rows, cols, std::move(data));
}

inline SampleSet read_sample_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  return read_sample_csv(in);
}

}  // namespace kpn
