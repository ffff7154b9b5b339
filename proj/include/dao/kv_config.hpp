// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "dao/error.hpp"

namespace dao {

/// `key = value` lines; blank lines and `#` comments are ignored. Keys are unique.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text) {
    KeyValueConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto trimmed = trim(line);
      if (trimmed.empty()) continue;
      auto eq = trimmed.find('=');
      if (eq == std::string_view::npos) {
        throw Error(Errc::kParse, "line " + std::to_string(line_no) + ": expected key = value");
      }
      std::string key(trim(trimmed.substr(0, eq)));
      std::string value(trim(trimmed.substr(eq + 1)));
      if (key.empty()) throw Error(Errc::kParse, "line " + std::to_string(line_no) + ": empty key");
      if (!cfg.values_.emplace(key, value).second) {
        throw Error(Errc::kParse, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
      }
    }
    return cfg;
  }

  static KeyValueConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::kNotFound, "cannot read config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  bool has(const std::string& key) const { return values_.contains(key); }

  std::string get_string(const std::string& key, std::string fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::uint64_t v = 0;
    const auto& s = it->second;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw bad(key);
    return v;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(it->second, &used);
    } catch (const std::exception&) {
      throw bad(key);
    }
    if (used != it->second.size()) throw bad(key);
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw bad(key);
  }

  /// Throws on any key outside `known`, so typos fail loudly.
  void require_known(const std::set<std::string>& known) const {
    for (const auto& [k, v] : values_) {
      if (!known.contains(k)) throw Error(Errc::kParse, "unknown key '" + k + "'");
    }
  }

 private:
  static std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  }

  static Error bad(const std::string& key) { return Error(Errc::kParse, "bad value for '" + key + "'"); }

  std::map<std::string, std::string> values_;
};

}  // namespace dao
