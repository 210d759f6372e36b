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

#include <cstdint>

#include <Eigen/Dense>

namespace oel {

/// Decoding workload on random blocks: `queries` test points scored against
/// `candidates` candidates, keeping the top k. Only the decoding call is
/// timed; candidate-side blocks are prepared beforehand as in a deployed
/// predictor.
struct DecodeWorkload {
  Eigen::Index n = 2000;        // training size, IOKR inner dimension
  int p = 100;                  // OEL inner dimension
  Eigen::Index candidates = 100000;
  Eigen::Index queries = 256;
  int k = 10;
  int repeats = 3;
  std::uint64_t seed = 0;
};

/// Milliseconds per query, minimum over repeats.
double time_decode_iokr(const DecodeWorkload& w);
double time_decode_oel(const DecodeWorkload& w);

}  // namespace oel
