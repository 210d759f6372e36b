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

#include <algorithm>
#include <numeric>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "oel/kernels.hpp"
#include "oel/metrics.hpp"
#include "oracles.hpp"

using namespace oel;
using namespace oel::testing;

namespace {

Eigen::VectorXd bits(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Ranking whose truth candidate (index 0) sits at the given 1-based rank.
Ranking truth_at(int rank, int length) {
  Ranking r;
  for (int i = 1; i <= length; ++i) r.candidates.push_back(i == rank ? 0 : i);
  r.scores.assign(static_cast<std::size_t>(length), 0.0);
  return r;
}

std::vector<std::vector<int>> all_rank_vectors(int k) {
  std::vector<int> ranks(static_cast<std::size_t>(k));
  std::iota(ranks.begin(), ranks.end(), 1);
  std::vector<std::vector<int>> out;
  do out.push_back(ranks);
  while (std::next_permutation(ranks.begin(), ranks.end()));
  return out;
}

// Pair counting straight from the definition.
double kendall_by_pairs(const std::vector<int>& a, const std::vector<int>& b) {
  const int k = static_cast<int>(a.size());
  int con = 0, dis = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const int s = (a[i] - a[j]) * (b[i] - b[j]);
      (s > 0 ? con : dis) += 1;
    }
  return static_cast<double>(con - dis) / (k * (k - 1) / 2.0);
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("rkhs loss examples") {
    CHECK(rkhs_loss(1.0, 1.0, 1.0) == 0.0);
    CHECK(rkhs_loss(1.0, 1.0, 0.0) == 2.0);
    const Eigen::Vector2d y(1, 0), yp(0, 1);
    CHECK(rkhs_loss(y.squaredNorm(), yp.squaredNorm(), y.dot(yp)) == 2.0);
    CHECK(rkhs_loss(1.0, 1.0, 1.0 + 1e-12) == 0.0);
    CHECK_THROWS_AS(rkhs_loss(1.0, 1.0, 1.1), std::invalid_argument);
  }

  TEST_CASE("rkhs loss is symmetric and equals 2 - 2k for normalized kernels") {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd y = random_matrix(10, 3, rng);
    const Eigen::MatrixXd k = self_gram(KernelSpec::gaussian(0.7), y);
    for (Eigen::Index i = 0; i < 10; ++i)
      for (Eigen::Index j = 0; j < 10; ++j) {
        const double l = rkhs_loss(k(i, i), k(j, j), k(i, j));
        CHECK(l == rkhs_loss(k(j, j), k(i, i), k(j, i)));
        CHECK(l >= 0.0);
        CHECK(std::abs(l - (2.0 - 2.0 * k(i, j))) <= 1e-12);
      }
  }

  TEST_CASE("f1 examples") {
    CHECK(f1_example(bits({1, 0, 1}), bits({1, 0, 1})) == 1.0);
    CHECK(f1_example(bits({0, 1, 1}), bits({1, 1, 0})) == 0.5);
    CHECK(f1_example(bits({0, 0, 0}), bits({0, 0, 0})) == 1.0);
    CHECK(f1_example(bits({1, 0}), bits({0, 0})) == 0.0);
    CHECK_THROWS_AS(f1_example(bits({1, 0}), bits({1})), std::invalid_argument);
  }

  TEST_CASE("f1 is invariant under a shared label permutation") {
    std::mt19937_64 rng(2);
    std::bernoulli_distribution coin(0.4);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd t(12), p(12);
      for (Eigen::Index i = 0; i < 12; ++i) {
        t(i) = coin(rng);
        p(i) = coin(rng);
      }
      std::vector<int> perm(12);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      Eigen::VectorXd tp(12), pp(12);
      for (Eigen::Index i = 0; i < 12; ++i) {
        tp(i) = t(perm[static_cast<std::size_t>(i)]);
        pp(i) = p(perm[static_cast<std::size_t>(i)]);
      }
      CHECK(f1_example(t, p) == f1_example(tp, pp));
    }
  }

  TEST_CASE("mean f1 averages rows") {
    Eigen::MatrixXd t(2, 3), p(2, 3);
    t << 1, 0, 1, 0, 1, 1;
    p << 1, 0, 1, 1, 1, 0;
    CHECK(mean_f1(t, p) == doctest::Approx(0.75));
    CHECK_THROWS_AS(mean_f1(t, p.leftCols(2)), std::invalid_argument);
  }

  TEST_CASE("hamming examples") {
    CHECK(hamming(bits({1, 0, 1}), bits({1, 0, 1})) == 0);
    CHECK(hamming(bits({1, 0, 1, 1}), bits({0, 1, 0, 0})) == 4);
    CHECK(hamming(bits({1, 0, 1, 0}), bits({1, 1, 1, 1})) == 2);
    CHECK_THROWS_AS(hamming(bits({1, 0}), bits({1})), std::invalid_argument);
  }

  TEST_CASE("kendall examples") {
    const Permutation id({1, 2, 3, 4});
    CHECK(kendall_tau(id, id) == 1.0);
    CHECK(kendall_tau(id, Permutation({4, 3, 2, 1})) == -1.0);
    CHECK(kendall_tau(Permutation({1, 2, 3}), Permutation({1, 3, 2})) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(kendall_tau(Permutation({1}), Permutation({1})), std::invalid_argument);
    CHECK_THROWS_AS(kendall_tau(id, Permutation({1, 2, 3})), std::invalid_argument);
  }

  TEST_CASE("kendall equals the normalized Kemeny inner product for every pair up to five items") {
    for (int k = 2; k <= 5; ++k) {
      const auto all = all_rank_vectors(k);
      const double pairs = k * (k - 1) / 2.0;
      for (const auto& a : all)
        for (const auto& b : all) {
          const Permutation pa(a), pb(b);
          const double tau = kendall_tau(pa, pb);
          CHECK(tau == kendall_by_pairs(a, b));
          CHECK(tau == kemeny_embed(pa).dot(kemeny_embed(pb)) / pairs);
        }
    }
  }

  TEST_CASE("top-k examples") {
    std::vector<Ranking> first(3, truth_at(1, 12));
    CHECK(topk_accuracy(first, {0, 0, 0}, {1, 5, 10}) == std::vector<double>{1.0, 1.0, 1.0});
    CHECK(topk_accuracy({truth_at(7, 12)}, {0}, {5, 10}) == std::vector<double>{0.0, 1.0});
    const std::vector<Ranking> four = {truth_at(1, 12), truth_at(2, 12), truth_at(6, 12), truth_at(11, 12)};
    CHECK(topk_accuracy(four, {0, 0, 0, 0}, {1, 5, 10}) == std::vector<double>{0.25, 0.5, 0.75});
  }

  TEST_CASE("absent truth counts as a miss") {
    const std::vector<Ranking> two = {truth_at(1, 5), truth_at(1, 5)};
    CHECK(topk_accuracy(two, {0, -1}, {1}) == std::vector<double>{0.5});
    CHECK_THROWS_AS(topk_accuracy(two, {0}, {1}), std::invalid_argument);
  }

  TEST_CASE("top-k accuracy is non-decreasing in k") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> rank(1, 30);
    std::vector<Ranking> rs;
    std::vector<Eigen::Index> truth;
    for (int q = 0; q < 40; ++q) {
      rs.push_back(truth_at(rank(rng), 30));
      truth.push_back(0);
    }
    std::vector<int> ks(30);
    std::iota(ks.begin(), ks.end(), 1);
    const auto acc = topk_accuracy(rs, truth, ks);
    for (std::size_t i = 1; i < acc.size(); ++i) CHECK(acc[i - 1] <= acc[i]);
    CHECK(acc.back() == 1.0);
  }

  TEST_CASE("summaries") {
    const std::vector<double> v = {1.0, 2.0, 3.0, 6.0};
    const MetricReport r = summarize("loss", v);
    CHECK(r.mean == 3.0);
    CHECK(r.repetitions == 4);
    REQUIRE(r.standard_error.has_value());
    CHECK(*r.standard_error == doctest::Approx(std::sqrt(14.0 / 3.0 / 4.0)));
    const std::vector<double> one = {5.0};
    CHECK_FALSE(summarize("x", one).standard_error.has_value());
    std::ostringstream out;
    write_report_tsv(out, {r, summarize("x", one)});
    CHECK(out.str() == "metric\tmean\tstderr\trepetitions\nloss\t3\t" +
                           [] {
                             char b[64];
                             std::snprintf(b, sizeof b, "%.17g", std::sqrt(14.0 / 3.0 / 4.0));
                             return std::string(b);
                           }() +
                           "\t4\nx\t5\tNA\t1\n");
    CHECK(format_report_table({r}).find("loss") != std::string::npos);
  }
}
