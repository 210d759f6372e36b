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

#include "oel/decode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "oel/errors.hpp"
#include "oel/parallel.hpp"

namespace oel {
namespace {

// Score tiles of kCandidateBlock x kQueryBlock doubles stay cache resident.
constexpr Eigen::Index kQueryBlock = 64;
constexpr Eigen::Index kCandidateBlock = 2048;

struct Scored {
  double score;
  Eigen::Index index;
};

bool before(const Scored& a, const Scored& b) {
  return a.score < b.score || (a.score == b.score && a.index < b.index);
}

// Bounded max-heap of the k best candidates seen so far.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k); }

  void offer(double score, Eigen::Index index) {
    const Scored s{score, index};
    if (heap_.size() < k_) {
      heap_.push_back(s);
      std::push_heap(heap_.begin(), heap_.end(), before);
    } else if (before(s, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), before);
      heap_.back() = s;
      std::push_heap(heap_.begin(), heap_.end(), before);
    }
  }

  Ranking finish() {
    std::sort_heap(heap_.begin(), heap_.end(), before);
    Ranking r;
    r.candidates.reserve(heap_.size());
    r.scores.reserve(heap_.size());
    for (const auto& s : heap_) {
      r.candidates.push_back(s.index);
      r.scores.push_back(s.score);
    }
    return r;
  }

 private:
  std::size_t k_;
  std::vector<Scored> heap_;
};

// Shared scorer: score(c) = norms[c] - 2 <queries[:, j], cands[:, c]>.
std::vector<Ranking> decode_scores(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& cands,
                                   const Eigen::VectorXd& norms, int k, QueryCandidates lists, const char* who) {
  const std::string name(who);
  if (k < 1) throw std::invalid_argument(name + ": k must be at least 1");
  if (queries.rows() != cands.rows())
    throw std::invalid_argument(name + ": query and candidate blocks have " + std::to_string(queries.rows()) +
                                " and " + std::to_string(cands.rows()) + " rows");
  if (norms.size() != cands.cols())
    throw std::invalid_argument(name + ": " + std::to_string(norms.size()) + " self norms for " +
                                std::to_string(cands.cols()) + " candidates");
  const Eigen::Index t = queries.cols();
  const Eigen::Index n_cand = cands.cols();
  if (!lists.empty() && static_cast<Eigen::Index>(lists.size()) != t)
    throw std::invalid_argument(name + ": " + std::to_string(lists.size()) + " candidate lists for " +
                                std::to_string(t) + " queries");
  if (lists.empty() && n_cand == 0) throw std::invalid_argument(name + ": empty candidate set");

  std::vector<Ranking> out(static_cast<std::size_t>(t));

  if (!lists.empty()) {
    for (Eigen::Index j = 0; j < t; ++j) {
      const auto& list = lists[static_cast<std::size_t>(j)];
      if (list.empty()) throw std::invalid_argument(name + ": query " + std::to_string(j) + " has no candidates");
      for (Eigen::Index c : list)
        if (c < 0 || c >= n_cand)
          throw std::invalid_argument(name + ": query " + std::to_string(j) + " references candidate " +
                                      std::to_string(c) + " of " + std::to_string(n_cand));
    }
    parallel_for(static_cast<std::size_t>(t), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t j = lo; j < hi; ++j) {
        const auto& list = lists[j];
        TopK top(std::min<std::size_t>(static_cast<std::size_t>(k), list.size()));
        const auto q = queries.col(static_cast<Eigen::Index>(j));
        for (Eigen::Index c : list) top.offer(norms(c) - 2.0 * cands.col(c).dot(q), c);
        out[j] = top.finish();
      }
    });
    return out;
  }

  const std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k), static_cast<std::size_t>(n_cand));
  const std::size_t blocks = static_cast<std::size_t>((t + kQueryBlock - 1) / kQueryBlock);
  parallel_for(blocks, [&](std::size_t lo, std::size_t hi) {
    Eigen::MatrixXd inner;
    for (std::size_t b = lo; b < hi; ++b) {
      const Eigen::Index j0 = static_cast<Eigen::Index>(b) * kQueryBlock;
      const Eigen::Index width = std::min(kQueryBlock, t - j0);
      std::vector<TopK> tops(static_cast<std::size_t>(width), TopK(k_eff));
      for (Eigen::Index c0 = 0; c0 < n_cand; c0 += kCandidateBlock) {
        const Eigen::Index rows = std::min(kCandidateBlock, n_cand - c0);
        inner.noalias() = cands.middleCols(c0, rows).transpose() * queries.middleCols(j0, width);
        for (Eigen::Index j = 0; j < width; ++j) {
          TopK& top = tops[static_cast<std::size_t>(j)];
          const double* col = inner.col(j).data();
          const double* nrm = norms.data() + c0;
          for (Eigen::Index c = 0; c < rows; ++c) top.offer(nrm[c] - 2.0 * col[c], c0 + c);
        }
      }
      for (Eigen::Index j = 0; j < width; ++j) out[static_cast<std::size_t>(j0 + j)] = tops[static_cast<std::size_t>(j)].finish();
    }
  });
  return out;
}

}  // namespace

std::vector<Ranking> decode_oel(const Eigen::MatrixXd& z_test, const Eigen::MatrixXd& z_cand,
                                const Eigen::VectorXd& self_norms, int k, QueryCandidates query_cands) {
  return decode_scores(z_test, z_cand, self_norms, k, query_cands, "decode_oel");
}

std::vector<Ranking> decode_iokr(const Eigen::MatrixXd& alpha_test, const Eigen::MatrixXd& c_s,
                                 const Eigen::VectorXd& self_norms, int k, QueryCandidates query_cands) {
  return decode_scores(alpha_test, c_s, self_norms, k, query_cands, "decode_iokr");
}

void write_rankings(std::ostream& out, const std::vector<std::string>& query_ids, const std::vector<Ranking>& rankings,
                    const std::vector<std::string>& candidate_ids) {
  if (query_ids.size() != rankings.size())
    throw std::invalid_argument("write_rankings: query id count does not match rankings");
  char buf[64];
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    out << query_ids[q];
    const Ranking& r = rankings[q];
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
      const auto c = static_cast<std::size_t>(r.candidates[i]);
      if (c >= candidate_ids.size()) throw std::invalid_argument("write_rankings: candidate index out of range");
      std::snprintf(buf, sizeof buf, "%.6g", r.scores[i]);
      out << '\t' << candidate_ids[c] << ':' << buf;
    }
    out << '\n';
  }
}

std::vector<RankingRecord> read_rankings(std::istream& in, const std::string& source_name) {
  std::vector<RankingRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    RankingRecord rec;
    std::getline(fields, rec.query_id, '\t');
    std::string pair;
    while (std::getline(fields, pair, '\t')) {
      const auto colon = pair.rfind(':');
      if (colon == std::string::npos || colon == 0)
        throw DataError(source_name + ":" + std::to_string(line_no) + ": expected candidate_id:score, got '" + pair +
                        "'");
      rec.candidate_ids.push_back(pair.substr(0, colon));
      try {
        std::size_t used = 0;
        rec.scores.push_back(std::stod(pair.substr(colon + 1), &used));
        if (used != pair.size() - colon - 1) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw DataError(source_name + ":" + std::to_string(line_no) + ": bad score in '" + pair + "'");
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace oel
