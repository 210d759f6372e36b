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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oel/decode.hpp"
#include "oel/kernels.hpp"

namespace oel {

/// Mean of a metric over repetitions (folds, splits or test examples) with
/// its standard error, which needs at least two repetitions.
struct MetricReport {
  std::string name;
  double mean = 0.0;
  std::optional<double> standard_error;
  int repetitions = 0;
};

MetricReport summarize(std::string name, std::span<const double> values);

/// ||psi(y) - psi(y')||^2 = k(y,y) + k(y',y') - 2 k(y,y'). Rounding below zero
/// is clamped; results under -1e-8 throw std::invalid_argument.
double rkhs_loss(double k_yy, double k_pp, double k_yp);

/// Example-based F1 = 2|T & P| / (|T| + |P|) on 0/1 label vectors. Two empty
/// sets score 1.
double f1_example(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred);

/// Row-wise f1_example averaged over a test set.
double mean_f1(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred);

/// Positions where two label vectors differ.
Eigen::Index hamming(const Eigen::VectorXd& y, const Eigen::VectorXd& y_other);

/// (concordant - discordant) / (K(K-1)/2). Throws for K < 2 or unequal K.
double kendall_tau(const Permutation& sigma, const Permutation& other);

/// Fraction of queries whose true candidate sits within the first k ranks,
/// one value per entry of ks. truth[q] < 0 marks a query whose truth is not
/// among its candidates; it counts as a miss and a warning is logged.
std::vector<double> topk_accuracy(const std::vector<Ranking>& rankings, const std::vector<Eigen::Index>& truth,
                                  const std::vector<int>& ks);

/// Aligned text table of reports.
std::string format_report_table(const std::vector<MetricReport>& reports);

/// Tab-separated `metric mean stderr repetitions` with a header row.
void write_report_tsv(std::ostream& out, const std::vector<MetricReport>& reports);

}  // namespace oel
