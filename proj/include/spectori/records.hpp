#pragma once

#include <charconv>
#include <cstdio>
#include <optional>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"

namespace spectori {

inline std::string format_double(double x) {
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_complex(Complex z) {
  return format_double(z.real()) + "," + format_double(z.imag());
}

template <class T>
std::string join_values(const std::vector<T>& v, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    if constexpr (std::is_floating_point_v<T>) out += format_double(v[i]);
    else out += std::to_string(v[i]);
  }
  return out;
}

// One line: `kind key=value key=value ...`, keys kept in insertion order.
class Record {
 public:
  explicit Record(std::string kind) : kind_(std::move(kind)) {}

  Record& add(const std::string& key, const std::string& value) {
    fields_.emplace_back(key, value);
    return *this;
  }
  Record& add(const std::string& key, const char* value) { return add(key, std::string(value)); }
  Record& add(const std::string& key, double value) { return add(key, format_double(value)); }
  Record& add(const std::string& key, int value) { return add(key, std::to_string(value)); }
  Record& add(const std::string& key, long value) { return add(key, std::to_string(value)); }
  Record& add(const std::string& key, bool value) { return add(key, value ? "1" : "0"); }
  Record& add(const std::string& key, Complex value) { return add(key, format_complex(value)); }

  std::string str() const {
    std::string out = kind_;
    for (const auto& [k, v] : fields_) out += " " + k + "=" + v;
    return out;
  }

 private:
  std::string kind_;
  std::vector<std::pair<std::string, std::string>> fields_;
};

struct ParsedRecord {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> fields;

  std::optional<std::string> get(const std::string& key) const {
    for (const auto& [k, v] : fields)
      if (k == key) return v;
    return std::nullopt;
  }
  std::vector<std::string> get_all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : fields)
      if (k == key) out.push_back(v);
    return out;
  }
  std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v) throw Error(ErrorCode::Parse, "missing field '" + key + "' in record '" + kind + "'");
    return *v;
  }
};

inline ParsedRecord parse_record(const std::string& line) {
  ParsedRecord rec;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
  };
  skip();
  std::size_t start = pos;
  while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
  rec.kind = line.substr(start, pos - start);
  if (rec.kind.empty() || rec.kind.find('=') != std::string::npos)
    throw Error(ErrorCode::Parse, "record kind expected at column 1");
  for (skip(); pos < line.size(); skip()) {
    start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r') ++pos;
    std::string token = line.substr(start, pos - start);
    auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(ErrorCode::Parse, "expected key=value at column " + std::to_string(start + 1));
    rec.fields.emplace_back(token.substr(0, eq), token.substr(eq + 1));
  }
  return rec;
}

inline double parse_double(const std::string& s, const std::string& what) {
  double x = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last)
    throw Error(ErrorCode::Parse, "cannot parse number '" + s + "' for " + what + " at offset " +
                                      std::to_string(ptr - first));
  return x;
}

inline long parse_long(const std::string& s, const std::string& what) {
  long x = 0;
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), last, x);
  if (ec != std::errc() || ptr != last)
    throw Error(ErrorCode::Parse, "cannot parse integer '" + s + "' for " + what);
  return x;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto p = s.find(sep, start);
    out.push_back(s.substr(start, p == std::string::npos ? std::string::npos : p - start));
    if (p == std::string::npos) break;
    start = p + 1;
  }
  return out;
}

inline Complex parse_complex(const std::string& s, const std::string& what) {
  auto parts = split(s, ',');
  if (parts.size() != 2) throw Error(ErrorCode::Parse, "expected re,im for " + what + ", got '" + s + "'");
  return {parse_double(parts[0], what), parse_double(parts[1], what)};
}

}  // namespace spectori
