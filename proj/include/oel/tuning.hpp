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
#include <iosfwd>
#include <string>
#include <vector>

#include "oel/dataio.hpp"
#include "oel/metrics.hpp"
#include "oel/pipeline.hpp"

namespace oel {

/// Per-parameter grids. The grid is their Cartesian product, enumerated
/// with sigma2 outermost, then lambda, q, p and c innermost.
struct SearchSpace {
  std::vector<double> lambdas;
  std::vector<int> ps;
  std::vector<double> cs;
  std::vector<double> sigma2s;
  std::vector<Eigen::Index> qs;

  /// lambda in 10^-7..10^0, p in powers of two up to n + m, c in
  /// {0, .25, .5, .75, 1} (just {1} when m = 0), the given sigma2, exact KRR.
  static SearchSpace defaults(Eigen::Index n, Eigen::Index m, double sigma2);

  /// Throws std::invalid_argument for an empty grid, p outside [1, n + m],
  /// c outside [0, 1], c < 1 without unsupervised outputs, or a
  /// nonpositive lambda or sigma2.
  void validate(Eigen::Index n, Eigen::Index m) const;

  /// Grid points in enumeration order. With iokr_only the p and c grids
  /// collapse to their first entry.
  std::vector<HyperParams> points(bool iokr_only) const;
};

struct TuneOptions {
  Metric metric = Metric::surrogate;
  FitOptions fit;
  // Reuse the KRR fit, A, output Gram blocks and the exact eigendecomposition
  // across grid points that differ only in p and c.
  bool share_krr = false;
};

/// One (grid point, split) evaluation.
struct ResultRow {
  std::size_t point = 0;
  int outer_fold = -1;  // -1 outside nested CV
  int split = 0;
  HyperParams params;
  double score = 0.0;   // NaN on failure
  std::string status;   // "ok" or the failure message
};

struct SearchResult {
  std::vector<HyperParams> points;
  std::vector<MetricReport> reports;  // per point; mean is NaN for failed points
  std::vector<bool> failed;
  std::size_t best = 0;
  HyperParams best_params;
  double best_score = 0.0;
  std::vector<ResultRow> rows;
};

/// Supervised rows at s.train become the training set and rows at s.test
/// the validation set. Unsupervised outputs and candidates are carried over
/// unchanged; per-query candidate lists are dropped.
Dataset fold_dataset(const Dataset& data, const Split& s);

/// Evaluates every grid point on every split. A point fails when any of
/// its splits fails; failures are recorded and only fatal (NumericalError)
/// when every point fails. The best point has the optimal mean score,
/// ties going to smaller p, then larger lambda.
SearchResult grid_search(const Dataset& data, const SearchSpace& space, const std::vector<Split>& splits,
                         const TuneOptions& options);

/// grid_search over split(n, repeated_subsample(ratio, reps), seed).
SearchResult grid_search_ssv(const Dataset& data, const SearchSpace& space, int reps, double ratio,
                             const TuneOptions& options, std::uint64_t seed);

struct NestedResult {
  std::vector<HyperParams> selected;  // per outer fold
  std::vector<double> outer_scores;
  MetricReport outer;
  std::vector<ResultRow> rows;  // inner evaluations plus one row per outer fold
};

/// Outer folds are split(n, kfold(outer), seed). Inside outer fold f the
/// training part is split by kfold(inner) with seed stream_seed(seed,
/// "inner" + f), the grid is searched, and the selected point is refit on
/// the whole training part and scored once on the held-out fold.
NestedResult nested_cv(const Dataset& data, const SearchSpace& space, int outer, int inner,
                       const TuneOptions& options, std::uint64_t seed);

/// Tab-separated, one row per ResultRow with every parameter.
void write_result_table(std::ostream& out, const std::vector<ResultRow>& rows);

}  // namespace oel
