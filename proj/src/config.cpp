// Copyright 2026 The OEL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "oel/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "oel/errors.hpp"

namespace oel {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw UsageError("config key '" + key + "': cannot parse '" + text + "'");
  return value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Shortest text that parses back to the same value.
template <typename T>
std::string format_number(T v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_number(values[i]);
  return out;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& source_name) {
  Config cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError(source_name + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw UsageError(source_name + ":" + std::to_string(line_no) + ": empty key");
    cfg.entries_[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  return parse(in, path);
}

void Config::set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::optional<std::string> Config::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Config::require(const std::string& key) const {
  auto v = find(key);
  if (!v) throw UsageError("missing required config key '" + key + "'");
  return *v;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) {
  if (auto v = find(key)) return *v;
  entries_[key] = fallback;
  return fallback;
}

double Config::get_double(const std::string& key, double fallback) {
  if (auto v = find(key)) return parse_number<double>(key, *v);
  entries_[key] = format_number(fallback);
  return fallback;
}

long long Config::get_int(const std::string& key, long long fallback) {
  if (auto v = find(key)) return parse_number<long long>(key, *v);
  entries_[key] = std::to_string(fallback);
  return fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) {
  if (auto v = find(key)) {
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw UsageError("config key '" + key + "': expected a boolean, got '" + *v + "'");
  }
  entries_[key] = fallback ? "true" : "false";
  return fallback;
}

std::vector<double> Config::get_double_list(const std::string& key, const std::vector<double>& fallback) {
  if (auto v = find(key)) {
    std::vector<double> out;
    for (const auto& item : split_list(*v)) out.push_back(parse_number<double>(key, item));
    return out;
  }
  entries_[key] = join(fallback);
  return fallback;
}

std::vector<long long> Config::get_int_list(const std::string& key, const std::vector<long long>& fallback) {
  if (auto v = find(key)) {
    std::vector<long long> out;
    for (const auto& item : split_list(*v)) out.push_back(parse_number<long long>(key, item));
    return out;
  }
  entries_[key] = join(fallback);
  return fallback;
}

void Config::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
}

}  // namespace oel
