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

#include "oel/bench.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include "oel/decode.hpp"
#include "oel/rng.hpp"

namespace oel {
namespace {

double time_decode(Eigen::Index dim, const DecodeWorkload& w, bool oel) {
  if (dim < 1 || w.candidates < 1 || w.queries < 1 || w.repeats < 1)
    throw std::invalid_argument("bench: sizes and repeats must be positive");
  Rng rng = make_rng(w.seed, "bench");
  const Eigen::MatrixXd cands = gaussian_matrix(dim, w.candidates, rng);
  const Eigen::MatrixXd queries = gaussian_matrix(dim, w.queries, rng);
  const Eigen::VectorXd norms = cands.colwise().squaredNorm().transpose();

  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < w.repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    const auto rankings = oel ? decode_oel(queries, cands, norms, w.k) : decode_iokr(queries, cands, norms, w.k);
    const auto stop = std::chrono::steady_clock::now();
    if (rankings.size() != static_cast<std::size_t>(w.queries)) throw std::logic_error("bench: ranking count");
    best = std::min(best, std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return best / static_cast<double>(w.queries);
}

}  // namespace

double time_decode_iokr(const DecodeWorkload& w) { return time_decode(w.n, w, false); }
double time_decode_oel(const DecodeWorkload& w) { return time_decode(w.p, w, true); }

}  // namespace oel
