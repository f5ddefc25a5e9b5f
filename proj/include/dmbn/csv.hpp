#pragma once

#include <charconv>
#include <cstdlib>
#include <cstdio>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace dmbn {

// Minimal comma-separated reader for the numeric files used here. Blank lines
// and '#' comments are skipped; a leading line that is not numeric is taken
// as the header.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      split(line, fields);
      if (!seen_data_) {
        seen_data_ = true;
        if (!looks_numeric(fields.front())) {
          header_ = fields;
          continue;
        }
      }
      return true;
    }
    return false;
  }

  // 1-based line number of the last row returned.
  std::size_t line_number() const { return line_; }
  const std::vector<std::string>& header() const { return header_; }

 private:
  static void split(const std::string& line, std::vector<std::string>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      auto piece = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      auto b = piece.find_first_not_of(" \t");
      auto e = piece.find_last_not_of(" \t");
      out.push_back(b == std::string::npos ? std::string{} : piece.substr(b, e - b + 1));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }

  static bool looks_numeric(const std::string& s) {
    if (s.empty()) return false;
    char c = s[0];
    return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.';
  }

  std::istream& in_;
  std::size_t line_ = 0;
  bool seen_data_ = false;
  std::vector<std::string> header_;
};

inline bool parse_integer(std::string_view s, long long& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

// 17 significant digits: round-trips every double.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace dmbn
