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
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "oel/linalg.hpp"

namespace oel {

enum class KrrMode { exact, nystrom };

/// Fitted kernel ridge regression into the output feature space.
///
/// The prediction at x is h(x) = sum_i alpha_i(x) psi(y_i); the model only
/// produces the weights alpha(x). Regularization uses the n*lambda scaling,
/// alpha(x) = (K_x + n lambda I)^{-1} kappa(x) in exact mode.
///
/// Nystrom mode restricts the regressor to the span of q anchor inputs and
/// solves the subsampled normal equations
///   alpha(x) = K_nq (K_nq^T K_nq + n lambda K_qq)^{-1} kappa_q(x),
/// where kappa_q(x) holds kernel values against the anchors only. The
/// solve runs in Nystrom feature coordinates: with K_qq = U S U^T truncated
/// to eigenvalues above 1e-12 * s_max, F = S^{-1/2} U^T (r x q), Phi = K_nq F^T,
///   alpha(x) = Phi (Phi^T Phi + n lambda I)^{-1} F kappa_q(x).
/// This equals the formula above when K_qq is well conditioned.
class KrrModel {
 public:
  static KrrModel exact(RegularizedSolver solver, double lambda);
  static KrrModel nystrom(std::vector<Eigen::Index> anchors, Eigen::MatrixXd features, Eigen::MatrixXd feature_map,
                          Eigen::MatrixXd normal_factor, double lambda);

  KrrMode mode() const { return mode_; }
  double lambda() const { return lambda_; }
  Eigen::Index n() const { return n_; }
  // Rows expected in kappa_test: n (exact) or q (nystrom).
  Eigen::Index basis_size() const;

  const RegularizedSolver& solver() const;            // exact only
  const std::vector<Eigen::Index>& anchors() const { return anchors_; }
  // Nystrom only.
  const Eigen::MatrixXd& features() const { return features_; }          // Phi, n x r
  const Eigen::MatrixXd& feature_map() const { return feature_map_; }    // F, r x q
  const Eigen::MatrixXd& normal_factor() const { return normal_factor_; }  // chol(Phi^T Phi + n lambda I)

  /// W = (K_x + n lambda I)^{-1}. Exact mode only.
  Eigen::MatrixXd weights() const;

 private:
  KrrModel() = default;

  KrrMode mode_ = KrrMode::exact;
  double lambda_ = 0.0;
  Eigen::Index n_ = 0;
  std::optional<RegularizedSolver> solver_;
  std::vector<Eigen::Index> anchors_;
  Eigen::MatrixXd features_;
  Eigen::MatrixXd feature_map_;
  Eigen::MatrixXd normal_factor_;
};

KrrModel fit_krr(const Eigen::MatrixXd& kx, double lambda);

/// Column j of the result is alpha(x_test_j). kappa_test is n x t in exact
/// mode and q x t, rows against the anchors, in nystrom mode.
Eigen::MatrixXd predict_alpha(const KrrModel& model, const Eigen::MatrixXd& kappa_test);

/// kx_cols: n x q kernel columns against the anchors; kx_qq: q x q anchor
/// Gram. Throws NumericalError when K_qq has no positive eigenvalue.
KrrModel fit_krr_nystrom(const Eigen::MatrixXd& kx_cols, const Eigen::MatrixXd& kx_qq, double lambda,
                         std::vector<Eigen::Index> anchors);

/// q distinct indices drawn uniformly without replacement from [0, n), sorted.
std::vector<Eigen::Index> sample_anchors(Eigen::Index n, Eigen::Index q, std::uint64_t seed);

/// (1/n) tr((A - I)^T K_y (A - I)), the mean squared RKHS error of the fitted
/// surrogate on its own training points. A holds alpha(x_i) in column i.
double training_surrogate_loss(const Eigen::MatrixXd& alpha_train, const Eigen::MatrixXd& ky);

}  // namespace oel
