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

#include "oel/embedding.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "oel/errors.hpp"
#include "oel/log.hpp"

namespace oel {
namespace {

constexpr double kDropThreshold = 1e-10;

std::string dims(const Eigen::MatrixXd& x) { return std::to_string(x.rows()) + "x" + std::to_string(x.cols()); }

}  // namespace

double MixedGram::supervised_scale() const { return n > 0 ? c / static_cast<double>(n) : 0.0; }

double MixedGram::cross_scale() const {
  return (n > 0 && m > 0) ? std::sqrt(c * (1.0 - c) / (static_cast<double>(n) * static_cast<double>(m))) : 0.0;
}

double MixedGram::unsupervised_scale() const { return m > 0 ? (1.0 - c) / static_cast<double>(m) : 0.0; }

MixedGram assemble_mixed_gram(std::shared_ptr<const Eigen::MatrixXd> a_ptr,
                              std::shared_ptr<const Eigen::MatrixXd> ky_ss_ptr,
                              std::shared_ptr<const Eigen::MatrixXd> ky_su_ptr, const Eigen::MatrixXd& ky_uu,
                              double c) {
  if (!a_ptr || !ky_ss_ptr || !ky_su_ptr) throw std::invalid_argument("assemble_mixed_gram: missing block");
  const auto& a = *a_ptr;
  const auto& ky_ss = *ky_ss_ptr;
  const auto& ky_su = *ky_su_ptr;
  const Eigen::Index n = a.rows();
  const Eigen::Index m = ky_uu.rows();
  if (n < 1 || a.cols() != n || ky_ss.rows() != n || ky_ss.cols() != n || ky_su.rows() != n || ky_su.cols() != m ||
      ky_uu.cols() != m)
    throw std::invalid_argument("assemble_mixed_gram: non-conformable blocks A " + dims(a) + ", K_ss " + dims(ky_ss) +
                                ", K_su " + dims(ky_su) + ", K_uu " + dims(ky_uu));
  if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("assemble_mixed_gram: c must lie in [0, 1]");
  if (m == 0 && c < 1.0) throw std::invalid_argument("assemble_mixed_gram: m = 0 requires c = 1");

  MixedGram g;
  g.n = n;
  g.m = m;
  g.c = c;
  g.a = std::move(a_ptr);
  g.ky_ss = std::move(ky_ss_ptr);
  g.ky_su = std::move(ky_su_ptr);

  g.k.resize(n + m, n + m);
  const Eigen::MatrixXd ky_a = ky_ss * a;
  g.k.topLeftCorner(n, n).noalias() = g.supervised_scale() * (a.transpose() * ky_a);
  if (m > 0) {
    g.k.topRightCorner(n, m).noalias() = g.cross_scale() * (a.transpose() * ky_su);
    g.k.bottomRightCorner(m, m) = g.unsupervised_scale() * ky_uu;
  }
  g.k.triangularView<Eigen::StrictlyLower>() = g.k.transpose();
  return g;
}

MixedGram assemble_mixed_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ky_ss, const Eigen::MatrixXd& ky_su,
                              const Eigen::MatrixXd& ky_uu, double c) {
  return assemble_mixed_gram(std::make_shared<const Eigen::MatrixXd>(a), std::make_shared<const Eigen::MatrixXd>(ky_ss),
                             std::make_shared<const Eigen::MatrixXd>(ky_su), ky_uu, c);
}

std::string_view to_string(EigMethod method) { return method == EigMethod::exact ? "exact" : "randomized"; }

EigMethod parse_eig_method(std::string_view name) {
  if (name == "exact") return EigMethod::exact;
  if (name == "randomized") return EigMethod::randomized;
  throw std::invalid_argument("unknown eigen method '" + std::string(name) + "'");
}

OelModel::OelModel(Eigen::MatrixXd beta, Eigen::VectorXd mu, double c, std::shared_ptr<const Eigen::MatrixXd> a,
                   std::shared_ptr<const Eigen::MatrixXd> ky_ss, std::shared_ptr<const Eigen::MatrixXd> ky_su,
                   double gram_trace, int requested_p)
    : beta_(std::move(beta)),
      mu_(std::move(mu)),
      c_(c),
      n_(a ? a->rows() : 0),
      m_(ky_su ? ky_su->cols() : 0),
      gram_trace_(gram_trace),
      requested_p_(requested_p),
      a_(std::move(a)),
      ky_ss_(std::move(ky_ss)),
      ky_su_(std::move(ky_su)) {
  if (!a_ || !ky_ss_ || !ky_su_) throw std::invalid_argument("OelModel: missing training blocks");
  if (beta_.rows() != n_ + m_ || beta_.cols() != mu_.size())
    throw std::invalid_argument("OelModel: beta is " + dims(beta_) + ", expected " + std::to_string(n_ + m_) + "x" +
                                std::to_string(mu_.size()));

  const double sup = n_ > 0 ? std::sqrt(c_ / static_cast<double>(n_)) : 0.0;
  const double unsup = m_ > 0 ? std::sqrt((1.0 - c_) / static_cast<double>(m_)) : 0.0;
  const auto beta_top = beta_.topRows(n_);
  const auto beta_bot = beta_.bottomRows(m_);

  cand_sup_.noalias() = sup * (*a_ * beta_top);
  cand_unsup_ = unsup * beta_bot;
  test_projector_.noalias() = *ky_ss_ * cand_sup_;
  if (m_ > 0) test_projector_.noalias() += *ky_su_ * cand_unsup_;
}

double OelModel::reconstruction_objective() const { return gram_trace_ - mu_.sum(); }

OelModel fit_oel_from_eig(const MixedGram& gram, const EigPair& eig, int p) {
  const Eigen::Index dim = gram.n + gram.m;
  if (p < 1 || p > dim)
    throw std::invalid_argument("fit_oel: p=" + std::to_string(p) + " out of range [1, " + std::to_string(dim) + "]");
  if (eig.values.size() < std::min<Eigen::Index>(p, dim) || eig.vectors.rows() != dim)
    throw std::invalid_argument("fit_oel: eigendecomposition is too small for the requested p");
  if (!(eig.values.size() > 0 && eig.values(0) > 0.0)) throw NumericalError("fit_oel: mixed Gram matrix is zero");

  const double floor = kDropThreshold * eig.values(0);
  int kept = 0;
  while (kept < p && eig.values(kept) > 0.0 && eig.values(kept) >= floor) ++kept;
  if (kept < p) {
    std::ostringstream msg;
    msg << "fit_oel: only " << kept << " of " << p << " eigenvalues above threshold; effective p = " << kept;
    log_warning(msg.str());
  }
  Eigen::VectorXd mu = eig.values.head(kept);
  Eigen::MatrixXd beta = eig.vectors.leftCols(kept) * mu.cwiseSqrt().cwiseInverse().asDiagonal();
  return OelModel(std::move(beta), std::move(mu), gram.c, gram.a, gram.ky_ss, gram.ky_su, gram.k.trace(), p);
}

OelModel fit_oel(const MixedGram& gram, const OelOptions& options) {
  const Eigen::Index dim = gram.n + gram.m;
  if (options.p < 1 || options.p > dim)
    throw std::invalid_argument("fit_oel: p=" + std::to_string(options.p) + " out of range [1, " +
                                std::to_string(dim) + "]");
  const EigPair eig = options.method == EigMethod::exact ? eig_topk_exact(gram.k, options.p)
                                                         : eig_topk_randomized(gram.k, options.p, options.sketch);
  return fit_oel_from_eig(gram, eig, options.p);
}

Eigen::MatrixXd training_embedding(const MixedGram& gram, const OelModel& model) { return gram.k * model.beta(); }

Eigen::MatrixXd embed_candidates(const OelModel& model, const Eigen::MatrixXd& c_s, const Eigen::MatrixXd& c_u) {
  if (c_s.rows() != model.n() || c_u.rows() != model.m() || c_s.cols() != c_u.cols())
    throw std::invalid_argument("embed_candidates: expected C_s " + std::to_string(model.n()) + "xN and C_u " +
                                std::to_string(model.m()) + "xN, got " + dims(c_s) + " and " + dims(c_u));
  Eigen::MatrixXd z = model.candidate_projector_sup().transpose() * c_s;
  if (model.m() > 0) z.noalias() += model.candidate_projector_unsup().transpose() * c_u;
  return z;
}

Eigen::MatrixXd embed_tests(const OelModel& model, const Eigen::MatrixXd& alpha_test) {
  if (alpha_test.rows() != model.n())
    throw std::invalid_argument("embed_tests: expected " + std::to_string(model.n()) + " rows, got " +
                                dims(alpha_test));
  return model.test_projector().transpose() * alpha_test;
}

}  // namespace oel
