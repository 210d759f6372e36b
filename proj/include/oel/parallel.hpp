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

#include <cstddef>
#include <functional>

namespace oel {

// Upper bound on worker threads used by parallel_for. Defaults to 1.
void set_max_threads(int threads);
int max_threads();

// Splits [0, count) into contiguous chunks and runs fn(begin, end) on each,
// one chunk per worker. Chunk boundaries depend only on count and the thread
// cap, so results written to disjoint slots are deterministic.
// Calls made from inside a worker run inline on that worker.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace oel
