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

#include "oel/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "oel/errors.hpp"
#include "oel/log.hpp"
#include "oel/parallel.hpp"
#include "oel/rng.hpp"

namespace oel {

SearchSpace SearchSpace::defaults(Eigen::Index n, Eigen::Index m, double sigma2) {
  SearchSpace s;
  for (int e = -7; e <= 0; ++e) s.lambdas.push_back(std::pow(10.0, e));
  for (Eigen::Index p = 1; p <= n + m; p *= 2) s.ps.push_back(static_cast<int>(p));
  s.cs = m > 0 ? std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0} : std::vector<double>{1.0};
  s.sigma2s = {sigma2};
  s.qs = {0};
  return s;
}

void SearchSpace::validate(Eigen::Index n, Eigen::Index m) const {
  if (lambdas.empty() || ps.empty() || cs.empty() || sigma2s.empty() || qs.empty())
    throw std::invalid_argument("search space: every grid needs at least one value");
  for (double l : lambdas)
    if (!(l > 0.0)) throw std::invalid_argument("search space: lambda must be positive");
  for (double s : sigma2s)
    if (!(s > 0.0)) throw std::invalid_argument("search space: sigma2 must be positive");
  for (int p : ps)
    if (p < 1 || p > n + m)
      throw std::invalid_argument("search space: p = " + std::to_string(p) + " outside [1, " + std::to_string(n + m) +
                                  "]");
  for (double c : cs) {
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("search space: c must lie in [0, 1]");
    if (m == 0 && c < 1.0) throw std::invalid_argument("search space: c < 1 needs unsupervised outputs");
  }
  for (auto q : qs)
    if (q < 0) throw std::invalid_argument("search space: q must be nonnegative");
}

std::vector<HyperParams> SearchSpace::points(bool iokr_only) const {
  const std::vector<int> p_grid = iokr_only ? std::vector<int>{ps.front()} : ps;
  const std::vector<double> c_grid = iokr_only ? std::vector<double>{cs.front()} : cs;
  std::vector<HyperParams> out;
  for (double s : sigma2s)
    for (double l : lambdas)
      for (auto q : qs)
        for (int p : p_grid)
          for (double c : c_grid) out.push_back(HyperParams{l, p, c, s, q});
  return out;
}

Dataset fold_dataset(const Dataset& data, const Split& s) {
  Dataset d;
  d.output_kind = data.output_kind;
  d.input_kernel = data.input_kernel;
  d.output_kernel = data.output_kernel;
  d.inputs = select_rows(data.inputs, s.train);
  d.outputs = select_rows(data.outputs, s.train);
  d.unsup_outputs = data.unsup_outputs;
  d.test_inputs = select_rows(data.inputs, s.test);
  d.test_outputs = select_rows(data.outputs, s.test);
  d.candidates = data.candidates;
  d.candidate_ids = data.candidate_ids;
  return d;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same_krr_key(const HyperParams& a, const HyperParams& b) {
  return a.sigma2 == b.sigma2 && a.lambda == b.lambda && a.q == b.q;
}

struct Cell {
  double score = kNaN;
  std::string status = "ok";
};

void record_failure(Cell& cell, const std::exception& e) {
  cell.score = kNaN;
  cell.status = std::string("failed: ") + e.what();
}

// Evaluates points [first, last) of one KRR group on one fold.
void run_group_independent(const Dataset& fold, const std::vector<HyperParams>& pts, std::size_t first,
                           std::size_t last, const TuneOptions& options, std::vector<Cell*>& out) {
  for (std::size_t i = first; i < last; ++i) {
    try {
      const Predictor model = fit_predictor(fold, pts[i], options.fit);
      out[i - first]->score = evaluate_predictor(model, fold, options.metric);
    } catch (const std::exception& e) {
      record_failure(*out[i - first], e);
    }
  }
}

void run_group_shared(const Dataset& fold, const std::vector<HyperParams>& pts, std::size_t first, std::size_t last,
                      const TuneOptions& options, std::vector<Cell*>& out) {
  std::optional<KrrStage> stage;
  try {
    stage.emplace(fit_krr_stage(fold, pts[first], options.fit, !options.fit.iokr_only));
  } catch (const std::exception& e) {
    for (auto* cell : out) record_failure(*cell, e);
    return;
  }
  if (options.fit.iokr_only) {
    for (std::size_t i = first; i < last; ++i) {
      try {
        const Predictor model = make_predictor(fold, *stage, pts[i], std::nullopt);
        out[i - first]->score = evaluate_predictor(model, fold, options.metric);
      } catch (const std::exception& e) {
        record_failure(*out[i - first], e);
      }
    }
    return;
  }

  // Distinct c values in first-seen order; one Gram and, for the exact
  // method, one eigendecomposition of width max p per c.
  std::vector<double> c_values;
  for (std::size_t i = first; i < last; ++i)
    if (std::find(c_values.begin(), c_values.end(), pts[i].c) == c_values.end()) c_values.push_back(pts[i].c);

  for (double c : c_values) {
    std::vector<std::size_t> members;
    for (std::size_t i = first; i < last; ++i)
      if (pts[i].c == c) members.push_back(i);
    try {
      const MixedGram g = stage_gram(*stage, c);
      const Eigen::Index dim = g.n + g.m;
      auto p_eff = [&](int p) { return static_cast<int>(std::min<Eigen::Index>(p, dim)); };
      std::optional<EigPair> eig;
      if (options.fit.eig == EigMethod::exact) {
        int p_max = 1;
        for (auto i : members) p_max = std::max(p_max, p_eff(pts[i].p));
        eig.emplace(eig_topk_exact(g.k, p_max));
      }
      for (auto i : members) {
        try {
          std::optional<OelModel> oel;
          if (eig) {
            oel.emplace(fit_oel_from_eig(g, *eig, p_eff(pts[i].p)));
          } else {
            OelOptions opt;
            opt.p = p_eff(pts[i].p);
            opt.method = options.fit.eig;
            opt.sketch = SketchOptions{options.fit.oversample, options.fit.power_iters,
                                       options.fit.sketch_seed};
            oel.emplace(fit_oel(g, opt));
          }
          const Predictor model = make_predictor(fold, *stage, pts[i], std::move(oel));
          out[i - first]->score = evaluate_predictor(model, fold, options.metric);
        } catch (const std::exception& e) {
          record_failure(*out[i - first], e);
        }
      }
    } catch (const std::exception& e) {
      for (auto i : members) record_failure(*out[i - first], e);
    }
  }
}

}  // namespace

SearchResult grid_search(const Dataset& data, const SearchSpace& space, const std::vector<Split>& splits,
                         const TuneOptions& options) {
  if (splits.empty()) throw std::invalid_argument("grid_search: no splits");
  space.validate(data.n(), data.m());
  SearchResult result;
  result.points = space.points(options.fit.iokr_only);
  const std::size_t n_pts = result.points.size();
  const std::size_t n_splits = splits.size();

  // Consecutive points sharing (sigma2, lambda, q) form one KRR group.
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t i = 0; i < n_pts; ++i) {
    if (groups.empty() || !same_krr_key(result.points[groups.back().first], result.points[i]))
      groups.emplace_back(i, i + 1);
    else
      groups.back().second = i + 1;
  }

  std::vector<Cell> cells(n_pts * n_splits);
  const std::size_t tasks = groups.size() * n_splits;
  parallel_for(tasks, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const auto [first, last] = groups[t / n_splits];
      const std::size_t s = t % n_splits;
      std::vector<Cell*> out;
      for (std::size_t i = first; i < last; ++i) out.push_back(&cells[i * n_splits + s]);
      Dataset fold;
      try {
        fold = fold_dataset(data, splits[s]);
      } catch (const std::exception& e) {
        for (auto* cell : out) record_failure(*cell, e);
        continue;
      }
      if (options.share_krr)
        run_group_shared(fold, result.points, first, last, options, out);
      else
        run_group_independent(fold, result.points, first, last, options, out);
    }
  });

  // Deterministic reduction in grid order.
  const bool minimize = lower_is_better(options.metric);
  std::optional<std::size_t> best;
  std::string first_failure;
  for (std::size_t i = 0; i < n_pts; ++i) {
    std::vector<double> scores;
    bool failed = false;
    for (std::size_t s = 0; s < n_splits; ++s) {
      const Cell& cell = cells[i * n_splits + s];
      result.rows.push_back(ResultRow{i, -1, static_cast<int>(s), result.points[i], cell.score, cell.status});
      if (cell.status != "ok") {
        failed = true;
        if (first_failure.empty()) first_failure = cell.status;
      }
      scores.push_back(cell.score);
    }
    MetricReport report = summarize(std::string(to_string(options.metric)), scores);
    if (failed) report.mean = kNaN;
    result.reports.push_back(report);
    result.failed.push_back(failed);
    if (failed || std::isnan(report.mean)) continue;
    if (!best) {
      best = i;
      continue;
    }
    const double incumbent = result.reports[*best].mean;
    const HyperParams& a = result.points[i];
    const HyperParams& b = result.points[*best];
    const bool better = minimize ? report.mean < incumbent : report.mean > incumbent;
    const bool tie = report.mean == incumbent;
    if (better || (tie && (a.p < b.p || (a.p == b.p && a.lambda > b.lambda)))) best = i;
  }
  if (!best) throw NumericalError("grid search: every grid point failed; first failure: " + first_failure);
  result.best = *best;
  result.best_params = result.points[*best];
  result.best_score = result.reports[*best].mean;
  return result;
}

SearchResult grid_search_ssv(const Dataset& data, const SearchSpace& space, int reps, double ratio,
                             const TuneOptions& options, std::uint64_t seed) {
  return grid_search(data, space, split(data.n(), SplitScheme::repeated_subsample(ratio, reps), seed), options);
}

NestedResult nested_cv(const Dataset& data, const SearchSpace& space, int outer, int inner,
                       const TuneOptions& options, std::uint64_t seed) {
  const auto outer_splits = split(data.n(), SplitScheme::kfold(outer), seed);
  NestedResult result;
  for (std::size_t f = 0; f < outer_splits.size(); ++f) {
    const Dataset outer_fold = fold_dataset(data, outer_splits[f]);
    Dataset outer_train = outer_fold;
    outer_train.test_inputs.resize(0, outer_fold.inputs.cols());
    outer_train.test_outputs.resize(0, outer_fold.outputs.cols());

    const auto inner_splits =
        split(outer_train.n(), SplitScheme::kfold(inner), stream_seed(seed, "inner" + std::to_string(f)));
    SearchResult inner_result = grid_search(outer_train, space, inner_splits, options);
    for (auto& row : inner_result.rows) {
      row.outer_fold = static_cast<int>(f);
      result.rows.push_back(std::move(row));
    }

    const HyperParams& chosen = inner_result.best_params;
    const Predictor model = fit_predictor(outer_train, chosen, options.fit);
    const double score = evaluate_predictor(model, outer_fold, options.metric);
    result.selected.push_back(chosen);
    result.outer_scores.push_back(score);
    result.rows.push_back(ResultRow{inner_result.best, static_cast<int>(f), -1, chosen, score, "outer"});
  }
  result.outer = summarize(std::string(to_string(options.metric)), result.outer_scores);
  return result;
}

void write_result_table(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "point\touter_fold\tsplit\tlambda\tp\tc\tsigma2\tq\tscore\tstatus\n";
  for (const auto& r : rows) {
    out << r.point << '\t' << r.outer_fold << '\t' << r.split << '\t' << r.params.lambda << '\t' << r.params.p << '\t'
        << r.params.c << '\t' << r.params.sigma2 << '\t' << r.params.q << '\t' << r.score << '\t' << r.status << '\n';
  }
}

}  // namespace oel
