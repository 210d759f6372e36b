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

#include <memory>
#include <string_view>

#include <Eigen/Dense>

#include "oel/linalg.hpp"

namespace oel {

/// Gram matrix of the n + m spanning vectors
///   sqrt(c/n) h(x_i),  i = 1..n   and   sqrt((1-c)/m) psi(y_j),  j = 1..m,
/// whose top eigenvectors give the learned output subspace.
///
/// `a` holds alpha(x_i) in column i (A = W K_x, symmetric for KRR fits).
struct MixedGram {
  Eigen::MatrixXd k;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  double c = 1.0;
  std::shared_ptr<const Eigen::MatrixXd> a;
  std::shared_ptr<const Eigen::MatrixXd> ky_ss;
  std::shared_ptr<const Eigen::MatrixXd> ky_su;

  double supervised_scale() const;    // c / n
  double cross_scale() const;         // sqrt(c (1 - c) / (n m))
  double unsupervised_scale() const;  // (1 - c) / m
};

/// Throws std::invalid_argument on non-conformable blocks, c outside [0, 1],
/// m = 0 with c < 1, or c = 0 with m = 0.
MixedGram assemble_mixed_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ky_ss, const Eigen::MatrixXd& ky_su,
                              const Eigen::MatrixXd& ky_uu, double c);

/// Same, sharing the given blocks instead of copying them.
MixedGram assemble_mixed_gram(std::shared_ptr<const Eigen::MatrixXd> a, std::shared_ptr<const Eigen::MatrixXd> ky_ss,
                              std::shared_ptr<const Eigen::MatrixXd> ky_su, const Eigen::MatrixXd& ky_uu, double c);

enum class EigMethod { exact, randomized };

std::string_view to_string(EigMethod method);
EigMethod parse_eig_method(std::string_view name);

struct OelOptions {
  int p = 1;
  EigMethod method = EigMethod::exact;
  SketchOptions sketch;
};

/// Learned p-dimensional output embedding G psi(y) = beta^T (<s_k, psi(y)>)_k.
///
/// beta has columns u_l / sqrt(mu_l) for the retained eigenpairs of the mixed
/// Gram matrix, so beta^T K beta = I_p. Eigenvalues below 1e-10 * mu_1 are
/// dropped; p() is the retained count and requested_p() what was asked for.
class OelModel {
 public:
  OelModel(Eigen::MatrixXd beta, Eigen::VectorXd mu, double c, std::shared_ptr<const Eigen::MatrixXd> a,
           std::shared_ptr<const Eigen::MatrixXd> ky_ss, std::shared_ptr<const Eigen::MatrixXd> ky_su,
           double gram_trace, int requested_p);

  const Eigen::MatrixXd& beta() const { return beta_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  double c() const { return c_; }
  Eigen::Index n() const { return n_; }
  Eigen::Index m() const { return m_; }
  int p() const { return static_cast<int>(mu_.size()); }
  int requested_p() const { return requested_p_; }
  double gram_trace() const { return gram_trace_; }
  const Eigen::MatrixXd& a() const { return *a_; }
  const Eigen::MatrixXd& ky_ss() const { return *ky_ss_; }
  const Eigen::MatrixXd& ky_su() const { return *ky_su_; }

  /// Mean reconstruction error of the scaled spanning vectors after projection
  /// on the learned subspace: tr(K) - sum of retained mu.
  double reconstruction_objective() const;

  // Z_test = test_projector()^T A_test.
  const Eigen::MatrixXd& test_projector() const { return test_projector_; }
  // Z_cand = candidate_projector_sup()^T C_s + candidate_projector_unsup()^T C_u.
  const Eigen::MatrixXd& candidate_projector_sup() const { return cand_sup_; }
  const Eigen::MatrixXd& candidate_projector_unsup() const { return cand_unsup_; }

 private:
  Eigen::MatrixXd beta_;
  Eigen::VectorXd mu_;
  double c_;
  Eigen::Index n_;
  Eigen::Index m_;
  double gram_trace_;
  int requested_p_;
  std::shared_ptr<const Eigen::MatrixXd> a_;
  std::shared_ptr<const Eigen::MatrixXd> ky_ss_;
  std::shared_ptr<const Eigen::MatrixXd> ky_su_;
  Eigen::MatrixXd test_projector_;
  Eigen::MatrixXd cand_sup_;
  Eigen::MatrixXd cand_unsup_;
};

OelModel fit_oel(const MixedGram& gram, const OelOptions& options);

/// Same as fit_oel with the exact method, reusing a precomputed
/// eigendecomposition that holds at least options.p pairs.
OelModel fit_oel_from_eig(const MixedGram& gram, const EigPair& eig, int p);

/// GY = K beta; row k is the embedding of the k-th scaled spanning vector.
Eigen::MatrixXd training_embedding(const MixedGram& gram, const OelModel& model);

/// p x N embeddings of candidates from their kernel columns against the
/// supervised (c_s: n x N) and unsupervised (c_u: m x N) training outputs.
Eigen::MatrixXd embed_candidates(const OelModel& model, const Eigen::MatrixXd& c_s, const Eigen::MatrixXd& c_u);

/// p x t embeddings G h(x) of test points from their KRR weights (n x t).
Eigen::MatrixXd embed_tests(const OelModel& model, const Eigen::MatrixXd& alpha_test);

}  // namespace oel
