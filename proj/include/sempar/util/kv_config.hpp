#pragma once

#include <istream>
#include <map>
#include <stdexcept>
#include <string>

#include "sempar/util/text.hpp"

namespace sempar::util {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key=value text with [section] headers and '#' comments.  Keys are
// reported as "section.key" ("" section for keys before any header).
// Duplicate keys: last one wins.
inline std::map<std::string, std::string> parse_kv_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" + s + "'");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    out[section.empty() ? key : section + "." + key] = val;
  }
  return out;
}

inline double kv_double(const std::map<std::string, std::string>& kv, const std::string& key,
                        double fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + it->second + "'");
  }
}

inline long kv_int(const std::map<std::string, std::string>& kv, const std::string& key,
                   long fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t pos = 0;
    long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + it->second + "'");
  }
}

inline bool kv_bool(const std::map<std::string, std::string>& kv, const std::string& key,
                    bool fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

inline std::string kv_string(const std::map<std::string, std::string>& kv, const std::string& key,
                             const std::string& fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

}  // namespace sempar::util
