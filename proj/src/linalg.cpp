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

#include "oel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "oel/errors.hpp"
#include "oel/rng.hpp"

namespace oel {
namespace {

// Eigenvalues in [-tol, 0) are rounding noise and clamped; anything below
// is a broken Gram matrix.
constexpr double kNegativeTolerance = 1e-10;

void require_square(const Eigen::MatrixXd& k, const char* what) {
  if (k.rows() != k.cols())
    throw std::invalid_argument(std::string(what) + ": matrix is " + std::to_string(k.rows()) + "x" +
                                std::to_string(k.cols()) + ", expected square");
}

// Largest-magnitude entry of each column made positive.
void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, j) < 0) vectors.col(j) = -vectors.col(j);
  }
}

// Reorders an ascending SelfAdjointEigenSolver result into the top p pairs,
// descending, after clamping tiny negatives.
EigPair take_top(const Eigen::VectorXd& ascending, const Eigen::MatrixXd& vectors, int p, bool check_all) {
  const Eigen::Index n = ascending.size();
  const double top = ascending(n - 1);
  const double tol = kNegativeTolerance * std::max(1.0, std::abs(top));
  const Eigen::Index checked_from = check_all ? 0 : n - p;
  for (Eigen::Index i = checked_from; i < n; ++i)
    if (ascending(i) < -tol) {
      std::ostringstream msg;
      msg << "eigendecomposition: eigenvalue " << ascending(i) << " is negative beyond tolerance; matrix is not PSD";
      throw NumericalError(msg.str());
    }
  EigPair out;
  out.values.resize(p);
  out.vectors.resize(vectors.rows(), p);
  for (int l = 0; l < p; ++l) {
    out.values(l) = std::max(0.0, ascending(n - 1 - l));
    out.vectors.col(l) = vectors.col(n - 1 - l);
  }
  fix_signs(out.vectors);
  return out;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

}  // namespace

double symmetry_defect(const Eigen::MatrixXd& k) {
  if (k.size() == 0) return 0.0;
  const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
  return (k - k.transpose()).cwiseAbs().maxCoeff() / scale;
}

RegularizedSolver::RegularizedSolver(Eigen::MatrixXd lower_factor, double shift)
    : factor_(std::move(lower_factor)), shift_(shift) {
  require_square(factor_, "RegularizedSolver");
}

Eigen::MatrixXd RegularizedSolver::solve(const Eigen::MatrixXd& b) const {
  if (b.rows() != dim())
    throw std::invalid_argument("RegularizedSolver::solve: rhs has " + std::to_string(b.rows()) + " rows, expected " +
                                std::to_string(dim()));
  Eigen::MatrixXd x = factor_.triangularView<Eigen::Lower>().solve(b);
  factor_.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Eigen::MatrixXd RegularizedSolver::inverse() const { return solve(Eigen::MatrixXd::Identity(dim(), dim())); }

RegularizedSolver solve_regularized(const Eigen::MatrixXd& k, double shift) {
  require_square(k, "solve_regularized");
  if (!(shift > 0.0)) throw std::invalid_argument("solve_regularized: shift must be positive");
  if (symmetry_defect(k) > 1e-8) throw std::invalid_argument("solve_regularized: matrix is not symmetric");

  Eigen::MatrixXd shifted = k;
  shifted.diagonal().array() += shift;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
    std::ostringstream msg;
    msg << "solve_regularized: Cholesky failed (min pivot " << ldlt.vectorD().minCoeff()
        << "); matrix is badly conditioned or not PSD";
    throw NumericalError(msg.str());
  }
  return RegularizedSolver(llt.matrixL(), shift);
}

EigPair eig_topk_exact(const Eigen::MatrixXd& k, int p) {
  require_square(k, "eig_topk_exact");
  if (p < 1 || p > k.rows())
    throw std::invalid_argument("eig_topk_exact: p=" + std::to_string(p) + " out of range [1, " +
                                std::to_string(k.rows()) + "]");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k);
  if (solver.info() != Eigen::Success) throw NumericalError("eig_topk_exact: eigensolver did not converge");
  return take_top(solver.eigenvalues(), solver.eigenvectors(), p, true);
}

EigPair eig_topk_randomized(const Eigen::MatrixXd& k, int p, const SketchOptions& options) {
  require_square(k, "eig_topk_randomized");
  if (p < 1 || p > k.rows())
    throw std::invalid_argument("eig_topk_randomized: p=" + std::to_string(p) + " out of range [1, " +
                                std::to_string(k.rows()) + "]");
  if (options.oversample < 0 || options.power_iters < 0)
    throw std::invalid_argument("eig_topk_randomized: oversample and power_iters must be nonnegative");
  const Eigen::Index width = static_cast<Eigen::Index>(p) + options.oversample;
  if (width > k.rows())
    throw std::invalid_argument("eig_topk_randomized: sketch width " + std::to_string(width) + " exceeds dimension " +
                                std::to_string(k.rows()));

  Rng rng(options.seed);
  Eigen::MatrixXd q = orthonormal_basis(k * gaussian_matrix(k.rows(), width, rng));
  for (int it = 0; it < options.power_iters; ++it) {
    q = orthonormal_basis(k * q);
    q = orthonormal_basis(k * q);
  }
  Eigen::MatrixXd compressed = q.transpose() * k * q;
  compressed = 0.5 * (compressed + compressed.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(compressed);
  if (solver.info() != Eigen::Success) throw NumericalError("eig_topk_randomized: eigensolver did not converge");
  return take_top(solver.eigenvalues(), q * solver.eigenvectors(), p, false);
}

}  // namespace oel
