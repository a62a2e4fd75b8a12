#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "guarctl/common.hpp"

namespace guarctl {

/// INI-style experiment configuration: [section] headers, `key = value`
/// lines, blank lines and full-line comments starting with '#'.  Values keep
/// their raw text; typed accessors parse on demand and report the offending
/// section.key on failure.  `canonical()` is a sorted normal form whose FNV
/// hash stamps every output file, tying artifacts to the exact inputs.
class ConfigMap {
 public:
  static ConfigMap parse(const std::string& text) {
    ConfigMap cfg;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      if (t.front() == '[') {
        if (t.back() != ']')
          throw ConfigError("config line " + std::to_string(lineno) +
                            ": unterminated section header");
        section = trim(t.substr(1, t.size() - 2));
        if (section.empty())
          throw ConfigError("config line " + std::to_string(lineno) +
                            ": empty section name");
        cfg.data_[section];  // a section may legitimately stay empty
        continue;
      }
      const std::size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": expected 'key = value'");
      if (section.empty())
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": key outside any [section]");
      const std::string key = trim(t.substr(0, eq));
      if (key.empty())
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": empty key");
      cfg.data_[section][key] = trim(t.substr(eq + 1));
    }
    return cfg;
  }

  static ConfigMap parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }

  bool has_section(const std::string& section) const {
    return data_.count(section) != 0;
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) != 0;
  }

  std::string get_string(const std::string& section,
                         const std::string& key) const {
    const auto s = data_.find(section);
    if (s != data_.end()) {
      const auto k = s->second.find(key);
      if (k != s->second.end()) return k->second;
    }
    throw ConfigError("config: missing required key " + section + "." + key);
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
  }

  double get_double(const std::string& section, const std::string& key) const {
    return parse_double(get_string(section, key), section, key);
  }
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
  }

  int get_int(const std::string& section, const std::string& key) const {
    const std::string v = get_string(section, key);
    try {
      std::size_t used = 0;
      const long n = std::stol(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return static_cast<int>(n);
    } catch (const std::exception&) {
      throw ConfigError("config: " + section + "." + key +
                        " is not an integer: '" + v + "'");
    }
  }
  int get_int(const std::string& section, const std::string& key,
              int fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
  }

  std::uint64_t get_u64(const std::string& section,
                        const std::string& key) const {
    const std::string v = get_string(section, key);
    try {
      std::size_t used = 0;
      const unsigned long long n = std::stoull(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return static_cast<std::uint64_t>(n);
    } catch (const std::exception&) {
      throw ConfigError("config: " + section + "." + key +
                        " is not an unsigned integer: '" + v + "'");
    }
  }

  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_string(section, key);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError("config: " + section + "." + key +
                      " is not a boolean: '" + v + "'");
  }

  /// Whitespace-separated list of numbers.
  std::vector<double> get_doubles(const std::string& section,
                                  const std::string& key) const {
    const std::string v = get_string(section, key);
    std::istringstream is(v);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(parse_double(tok, section, key));
    if (out.empty())
      throw ConfigError("config: " + section + "." + key + " is empty");
    return out;
  }

  /// Semicolon-separated list of points, each a whitespace-separated tuple:
  /// "1 0 ; -1 0" parses as {(1,0), (-1,0)}.
  std::vector<Vec> get_points(const std::string& section,
                              const std::string& key) const {
    const std::string v = get_string(section, key);
    std::vector<Vec> out;
    std::size_t start = 0;
    while (start <= v.size()) {
      std::size_t stop = v.find(';', start);
      if (stop == std::string::npos) stop = v.size();
      std::istringstream is(v.substr(start, stop - start));
      Vec p;
      std::string tok;
      while (is >> tok) p.push_back(parse_double(tok, section, key));
      if (!p.empty()) out.push_back(std::move(p));
      start = stop + 1;
    }
    if (out.empty())
      throw ConfigError("config: " + section + "." + key +
                        " holds no points");
    for (const Vec& p : out)
      if (p.size() != out.front().size())
        throw ConfigError("config: " + section + "." + key +
                          " mixes point dimensions");
    return out;
  }

  /// Sorted normal form: sections and keys in lexicographic order.
  std::string canonical() const {
    std::string out;
    for (const auto& [section, keys] : data_) {
      out += "[" + section + "]\n";
      for (const auto& [key, value] : keys)
        out += key + " = " + value + "\n";
    }
    return out;
  }

  std::uint64_t digest() const { return fnv1a64(canonical()); }

  std::string digest_hex() const {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(digest()));
    return buf;
  }

 private:
  static std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
  }

  static double parse_double(const std::string& v, const std::string& section,
                             const std::string& key) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("config: " + section + "." + key +
                        " is not a number: '" + v + "'");
    }
  }

  std::map<std::string, std::map<std::string, std::string>> data_;
};

}  // namespace guarctl
