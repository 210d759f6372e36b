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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oel {

/// Candidates of one query in rank order. Scores are squared RKHS distances
/// minus the query-constant ||prediction||^2 term, so they are comparable
/// within a query only. Ties are broken by ascending candidate index.
struct Ranking {
  std::vector<Eigen::Index> candidates;
  std::vector<double> scores;
};

/// Optional per-query candidate index lists; empty means every query is
/// scored against the full candidate set.
using QueryCandidates = std::span<const std::vector<Eigen::Index>>;

/// score(c) = self_norms[c] - 2 <z_test[:, j], z_cand[:, c]>, k smallest kept.
std::vector<Ranking> decode_oel(const Eigen::MatrixXd& z_test, const Eigen::MatrixXd& z_cand,
                                const Eigen::VectorXd& self_norms, int k, QueryCandidates query_cands = {});

/// score(c) = self_norms[c] - 2 <c_s[:, c], alpha_test[:, j]>.
std::vector<Ranking> decode_iokr(const Eigen::MatrixXd& alpha_test, const Eigen::MatrixXd& c_s,
                                 const Eigen::VectorXd& self_norms, int k, QueryCandidates query_cands = {});

/// One line per query: id, then tab-separated `candidate_id:score` pairs with
/// scores in 6 significant digits.
void write_rankings(std::ostream& out, const std::vector<std::string>& query_ids, const std::vector<Ranking>& rankings,
                    const std::vector<std::string>& candidate_ids);

struct RankingRecord {
  std::string query_id;
  std::vector<std::string> candidate_ids;
  std::vector<double> scores;
};

/// Parses the format written by write_rankings. Throws DataError with the
/// line number on malformed input.
std::vector<RankingRecord> read_rankings(std::istream& in, const std::string& source_name = "rankings");

}  // namespace oel
