#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "semvox/common.hpp"

namespace semvox::io::detail {

/// %.9g with fixed spellings for the special values.
inline std::string format_float(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline float parse_float(std::string_view s, const std::string& where) {
  const std::string tmp(s);
  char* end = nullptr;
  const float v = std::strtof(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw ConfigurationError(where + ": expected a number, got '" + tmp + "'");
  }
  return v;
}

inline double parse_double(std::string_view s, const std::string& where) {
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw ConfigurationError(where + ": expected a number, got '" + tmp + "'");
  }
  return v;
}

inline long long parse_int(std::string_view s, const std::string& where) {
  const std::string tmp(s);
  char* end = nullptr;
  const long long v = std::strtoll(tmp.c_str(), &end, 10);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw ConfigurationError(where + ": expected an integer, got '" + tmp + "'");
  }
  return v;
}

}  // namespace semvox::io::detail
