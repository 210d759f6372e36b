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

#include "oel/log.hpp"

#include <iostream>
#include <mutex>

namespace oel {
namespace {

std::mutex g_mutex;

LogSink& sink() {
  static LogSink s = [](LogLevel level, std::string_view message) {
    std::clog << (level == LogLevel::warning ? "warning: " : "") << message << '\n';
  };
  return s;
}

}  // namespace

void set_log_sink(LogSink s) {
  std::lock_guard lock(g_mutex);
  sink() = std::move(s);
}

void log(LogLevel level, std::string_view message) {
  std::lock_guard lock(g_mutex);
  if (sink()) sink()(level, message);
}

}  // namespace oel
