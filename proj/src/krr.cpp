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

#include "oel/krr.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "oel/errors.hpp"
#include "oel/rng.hpp"

namespace oel {

KrrModel KrrModel::exact(RegularizedSolver solver, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("krr: lambda must be positive");
  KrrModel m;
  m.mode_ = KrrMode::exact;
  m.lambda_ = lambda;
  m.n_ = solver.dim();
  m.solver_.emplace(std::move(solver));
  return m;
}

KrrModel KrrModel::nystrom(std::vector<Eigen::Index> anchors, Eigen::MatrixXd features, Eigen::MatrixXd feature_map,
                           Eigen::MatrixXd normal_factor, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("krr: lambda must be positive");
  const auto q = static_cast<Eigen::Index>(anchors.size());
  const Eigen::Index r = feature_map.rows();
  if (feature_map.cols() != q || features.cols() != r || normal_factor.rows() != r || normal_factor.cols() != r)
    throw std::invalid_argument("krr: Nystrom factor dimensions do not match the anchor count");
  KrrModel m;
  m.mode_ = KrrMode::nystrom;
  m.lambda_ = lambda;
  m.n_ = features.rows();
  m.anchors_ = std::move(anchors);
  m.features_ = std::move(features);
  m.feature_map_ = std::move(feature_map);
  m.normal_factor_ = std::move(normal_factor);
  return m;
}

Eigen::Index KrrModel::basis_size() const {
  return mode_ == KrrMode::exact ? n_ : static_cast<Eigen::Index>(anchors_.size());
}

const RegularizedSolver& KrrModel::solver() const {
  if (!solver_) throw std::logic_error("krr: solver() requires an exact-mode model");
  return *solver_;
}

Eigen::MatrixXd KrrModel::weights() const { return solver().inverse(); }

KrrModel fit_krr(const Eigen::MatrixXd& kx, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("krr: lambda must be positive");
  const double n = static_cast<double>(kx.rows());
  return KrrModel::exact(solve_regularized(kx, n * lambda), lambda);
}

Eigen::MatrixXd predict_alpha(const KrrModel& model, const Eigen::MatrixXd& kappa_test) {
  if (kappa_test.rows() != model.basis_size())
    throw std::invalid_argument("predict_alpha: kernel block has " + std::to_string(kappa_test.rows()) +
                                " rows, expected " + std::to_string(model.basis_size()));
  if (model.mode() == KrrMode::exact) return model.solver().solve(kappa_test);

  const Eigen::MatrixXd& l = model.normal_factor();
  Eigen::MatrixXd z = l.triangularView<Eigen::Lower>().solve(model.feature_map() * kappa_test);
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(z);
  return model.features() * z;
}

KrrModel fit_krr_nystrom(const Eigen::MatrixXd& kx_cols, const Eigen::MatrixXd& kx_qq, double lambda,
                         std::vector<Eigen::Index> anchors) {
  if (!(lambda > 0.0)) throw std::invalid_argument("krr: lambda must be positive");
  const Eigen::Index n = kx_cols.rows();
  const auto q = static_cast<Eigen::Index>(anchors.size());
  if (q < 1 || q > n) throw std::invalid_argument("krr: anchor count must be in [1, n]");
  if (kx_cols.cols() != q || kx_qq.rows() != q || kx_qq.cols() != q)
    throw std::invalid_argument("krr: Nystrom blocks do not match the anchor count");
  std::vector<Eigen::Index> sorted = anchors;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("krr: Nystrom anchors must be distinct");
  if (sorted.front() < 0 || sorted.back() >= n) throw std::invalid_argument("krr: Nystrom anchor index out of range");
  if (symmetry_defect(kx_qq) > 1e-8) throw std::invalid_argument("krr: anchor Gram is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kx_qq);
  if (es.info() != Eigen::Success) throw NumericalError("krr: eigendecomposition of the anchor Gram failed");
  const Eigen::VectorXd& s = es.eigenvalues();  // ascending
  const double s_max = s(q - 1);
  if (!(s_max > 0.0)) throw NumericalError("krr: anchor Gram has no positive eigenvalue");
  Eigen::Index r = 0;
  while (r < q && s(q - 1 - r) > 1e-12 * s_max) ++r;
  const Eigen::MatrixXd feature_map = (es.eigenvectors().rightCols(r).rowwise().reverse() *
                                       s.tail(r).reverse().cwiseSqrt().cwiseInverse().asDiagonal())
                                          .transpose();
  Eigen::MatrixXd features = kx_cols * feature_map.transpose();

  Eigen::MatrixXd normal = features.transpose() * features;
  normal.diagonal().array() += static_cast<double>(n) * lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) throw NumericalError("krr: Nystrom normal matrix is not positive definite");
  return KrrModel::nystrom(std::move(anchors), std::move(features), feature_map, llt.matrixL(), lambda);
}

std::vector<Eigen::Index> sample_anchors(Eigen::Index n, Eigen::Index q, std::uint64_t seed) {
  if (q < 1 || q > n) throw std::invalid_argument("sample_anchors: q must be in [1, n]");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  Rng rng(seed);
  // Partial Fisher-Yates: the first q slots are the sample.
  for (Eigen::Index i = 0; i < q; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(q));
  std::sort(idx.begin(), idx.end());
  return idx;
}

double training_surrogate_loss(const Eigen::MatrixXd& alpha_train, const Eigen::MatrixXd& ky) {
  const Eigen::Index n = ky.rows();
  if (alpha_train.rows() != n || alpha_train.cols() != n || ky.cols() != n)
    throw std::invalid_argument("training_surrogate_loss: expected n x n matrices");
  Eigen::MatrixXd residual = alpha_train;
  residual.diagonal().array() -= 1.0;
  return (residual.transpose() * ky * residual).trace() / static_cast<double>(n);
}

}  // namespace oel
