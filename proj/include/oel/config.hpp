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

#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oel {

/// Flat `key = value` configuration. Lines starting with '#' are comments.
///
/// Lookups with a default record that default, so after a run the config
/// holds every value actually used and can be written out as a snapshot.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source_name = "config");
  static Config load(const std::string& path);

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const;
  std::optional<std::string> find(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  long long get_int(const std::string& key, long long fallback);
  bool get_bool(const std::string& key, bool fallback);

  // Throws UsageError if the key is absent.
  std::string require(const std::string& key) const;

  std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback);
  std::vector<long long> get_int_list(const std::string& key, const std::vector<long long>& fallback);

  const std::map<std::string, std::string>& entries() const { return entries_; }

  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace oel
