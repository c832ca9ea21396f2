#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "orthant_lab/error.hpp"

namespace orthant_lab::io {

/// Shortest decimal that round-trips to the same double; NaN renders empty.
inline std::string format_double(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t v) { return std::to_string(v); }

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n") == std::string::npos) {
      os << f;
      continue;
    }
    os << '"';
    for (char ch : f) {
      if (ch == '"') os << '"';
      os << ch;
    }
    os << '"';
  }
  os << '\n';
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
  return f;
}

/// Parses "a..b" (inclusive), "a,b,c" or a single integer. "a..b" with b < a is empty.
inline std::vector<int> parse_int_range(std::string_view s) {
  std::vector<int> out;
  auto to_int = [&](std::string_view t) {
    int v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
      throw InvalidArgument("invalid integer '" + std::string(t) + "' in range '" + std::string(s) + "'");
    return v;
  };
  if (s.empty()) return out;
  if (const auto dots = s.find(".."); dots != std::string_view::npos) {
    const int lo = to_int(s.substr(0, dots));
    const int hi = to_int(s.substr(dots + 2));
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto tok = s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    out.push_back(to_int(tok));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

/// Parses a comma-separated list of reals.
inline std::vector<double> parse_real_list(std::string_view s) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto tok = std::string(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size()) throw InvalidArgument("invalid number '" + tok + "'");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace orthant_lab::io
