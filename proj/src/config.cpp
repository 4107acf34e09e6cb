// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <algorithm>

#include "error.hpp"
#include "io_util.hpp"

namespace olp {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

void KvConfig::set(std::string key, std::string value) {
  if (key.empty()) throw UsageError("empty config key");
  values_[std::move(key)] = std::move(value);
}

void KvConfig::set_default(const std::string& key, std::string value) {
  values_.emplace(key, std::move(value));
}

bool KvConfig::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& KvConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw UsageError("missing required config key '" + key + "'");
  return it->second;
}

std::string KvConfig::get_or(const std::string& key, std::string fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? std::move(fallback) : it->second;
}

long long KvConfig::get_int(const std::string& key) const {
  return parse_int(get(key), key);
}

double KvConfig::get_double(const std::string& key) const {
  return parse_double(get(key), key);
}

bool KvConfig::get_bool(const std::string& key) const {
  const auto& v = get(key);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw UsageError("config key '" + key + "' is not a boolean: '" + v + "'");
}

std::uint64_t KvConfig::get_seed(const std::string& key) const {
  const auto& v = get(key);
  try {
    return static_cast<std::uint64_t>(std::stoull(v));
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "' is not a seed: '" + v + "'");
  }
}

void KvConfig::load_file(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("bad config line " + std::to_string(i + 1) + " in " +
                      path.string() + ": '" + lines[i] + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw DataError("bad config line " + std::to_string(i + 1) + " in " +
                      path.string());
    values_[key] = value;
  }
}

std::string KvConfig::dump_sorted() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace olp
