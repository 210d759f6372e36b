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

#include "oel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "oel/log.hpp"

namespace oel {

MetricReport summarize(std::string name, std::span<const double> values) {
  MetricReport r;
  r.name = std::move(name);
  r.repetitions = static_cast<int>(values.size());
  if (values.empty()) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    const double var = ss / static_cast<double>(values.size() - 1);
    r.standard_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return r;
}

double rkhs_loss(double k_yy, double k_pp, double k_yp) {
  const double loss = k_yy + k_pp - 2.0 * k_yp;
  if (loss < -1e-8) throw std::invalid_argument("rkhs_loss: negative squared distance; kernel values are inconsistent");
  return std::max(0.0, loss);
}

double f1_example(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred) {
  if (truth.size() != pred.size()) throw std::invalid_argument("f1_example: label vectors differ in size");
  Eigen::Index both = 0, t = 0, p = 0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    const bool in_t = truth(i) != 0.0;
    const bool in_p = pred(i) != 0.0;
    t += in_t;
    p += in_p;
    both += in_t && in_p;
  }
  if (t + p == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(t + p);
}

double mean_f1(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred) {
  if (truth.rows() != pred.rows() || truth.cols() != pred.cols())
    throw std::invalid_argument("mean_f1: label matrices differ in shape");
  if (truth.rows() == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < truth.rows(); ++i) sum += f1_example(truth.row(i).transpose(), pred.row(i).transpose());
  return sum / static_cast<double>(truth.rows());
}

Eigen::Index hamming(const Eigen::VectorXd& y, const Eigen::VectorXd& y_other) {
  if (y.size() != y_other.size()) throw std::invalid_argument("hamming: label vectors differ in size");
  return (y.array() != y_other.array()).count();
}

double kendall_tau(const Permutation& sigma, const Permutation& other) {
  const int k = sigma.size();
  if (k != other.size()) throw std::invalid_argument("kendall_tau: permutations differ in length");
  if (k < 2) throw std::invalid_argument("kendall_tau: needs at least two items");
  long long agree = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const long long a = sigma.rank(j) - sigma.rank(i);
      const long long b = other.rank(j) - other.rank(i);
      agree += (a > 0) == (b > 0) ? 1 : -1;
    }
  return static_cast<double>(agree) / (static_cast<double>(k) * (k - 1) / 2.0);
}

std::vector<double> topk_accuracy(const std::vector<Ranking>& rankings, const std::vector<Eigen::Index>& truth,
                                  const std::vector<int>& ks) {
  if (rankings.size() != truth.size()) throw std::invalid_argument("topk_accuracy: one truth index per query needed");
  std::vector<double> hits(ks.size(), 0.0);
  std::size_t absent = 0;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    if (truth[q] < 0) {
      ++absent;
      continue;
    }
    const auto& c = rankings[q].candidates;
    const auto it = std::find(c.begin(), c.end(), truth[q]);
    if (it == c.end()) continue;
    const auto rank = static_cast<int>(it - c.begin()) + 1;
    for (std::size_t i = 0; i < ks.size(); ++i)
      if (rank <= ks[i]) hits[i] += 1.0;
  }
  if (absent > 0)
    log_warning("topk_accuracy: " + std::to_string(absent) + " queries have no true candidate; counted as misses");
  if (!rankings.empty())
    for (double& h : hits) h /= static_cast<double>(rankings.size());
  return hits;
}

std::string format_report_table(const std::vector<MetricReport>& reports) {
  std::size_t width = 6;
  for (const auto& r : reports) width = std::max(width, r.name.size());
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-*s  %12s  %12s  %6s\n", static_cast<int>(width), "metric", "mean", "stderr", "reps");
  out << buf;
  for (const auto& r : reports) {
    char se[32] = "-";
    if (r.standard_error) std::snprintf(se, sizeof se, "%.6g", *r.standard_error);
    std::snprintf(buf, sizeof buf, "%-*s  %12.6g  %12s  %6d\n", static_cast<int>(width), r.name.c_str(), r.mean, se,
                  r.repetitions);
    out << buf;
  }
  return out.str();
}

void write_report_tsv(std::ostream& out, const std::vector<MetricReport>& reports) {
  out << "metric\tmean\tstderr\trepetitions\n";
  char buf[64];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%.17g", r.mean);
    out << r.name << '\t' << buf << '\t';
    if (r.standard_error) {
      std::snprintf(buf, sizeof buf, "%.17g", *r.standard_error);
      out << buf;
    } else {
      out << "NA";
    }
    out << '\t' << r.repetitions << '\n';
  }
}

}  // namespace oel
