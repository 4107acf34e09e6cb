// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#ifndef OLP_CONFIG_HPP_
#define OLP_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace olp {

// Layered key-value configuration: `key = value` lines, '#' comments.
// Later assignments win, so defaults < config file < flags < environment
// composes by call order.
class KvConfig {
 public:
  void set(std::string key, std::string value);
  void set_default(const std::string& key, std::string value);  // keep existing
  bool has(const std::string& key) const;

  const std::string& get(const std::string& key) const;  // missing -> UsageError
  std::string get_or(const std::string& key, std::string fallback) const;
  long long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;  // "1"/"true" vs "0"/"false"
  std::uint64_t get_seed(const std::string& key) const;

  void load_file(const std::filesystem::path& path);
  std::string dump_sorted() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace olp

#endif  // OLP_CONFIG_HPP_
