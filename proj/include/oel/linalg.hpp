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

/// Factorization of (K + a I) for a symmetric PSD K and shift a > 0.
///
/// Holds the lower Cholesky factor L with L L^T = K + a I. The factor is
/// plain data, so a solver rebuilt from a persisted factor produces
/// bit-identical solves.
class RegularizedSolver {
 public:
  RegularizedSolver(Eigen::MatrixXd lower_factor, double shift);

  /// (K + a I)^{-1} B.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  /// (K + a I)^{-1}, materialized.
  Eigen::MatrixXd inverse() const;

  double shift() const { return shift_; }
  Eigen::Index dim() const { return factor_.rows(); }
  const Eigen::MatrixXd& factor() const { return factor_; }

 private:
  Eigen::MatrixXd factor_;
  double shift_;
};

/// Throws std::invalid_argument when K is not symmetric (relative 1e-8) or
/// a <= 0, NumericalError when the Cholesky factorization breaks down (the
/// message carries the smallest LDL^T pivot).
RegularizedSolver solve_regularized(const Eigen::MatrixXd& k, double shift);

/// Top eigenpairs of a symmetric PSD matrix, eigenvalues descending.
struct EigPair {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // n x p, orthonormal columns
};

EigPair eig_topk_exact(const Eigen::MatrixXd& k, int p);

struct SketchOptions {
  int oversample = 10;
  int power_iters = 2;
  std::uint64_t seed = 0;
};

/// Randomized range finder of width p + oversample followed by an exact
/// eigendecomposition of the compressed matrix Q^T K Q. Each power
/// iteration applies K twice with re-orthonormalization in between.
EigPair eig_topk_randomized(const Eigen::MatrixXd& k, int p, const SketchOptions& options);

/// max |K - K^T| relative to max(1, max |K|).
double symmetry_defect(const Eigen::MatrixXd& k);

}  // namespace oel
