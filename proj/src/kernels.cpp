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

#include "oel/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "oel/errors.hpp"
#include "oel/parallel.hpp"

namespace oel {

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::linear: return "linear";
    case KernelKind::tanimoto: return "tanimoto";
    case KernelKind::gaussian_tanimoto: return "gaussian_tanimoto";
    case KernelKind::precomputed: return "precomputed";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(std::string_view name) {
  for (auto kind : {KernelKind::gaussian, KernelKind::linear, KernelKind::tanimoto, KernelKind::gaussian_tanimoto,
                    KernelKind::precomputed})
    if (name == to_string(kind)) return kind;
  throw std::invalid_argument("unknown kernel kind '" + std::string(name) + "'");
}

KernelSpec KernelSpec::gaussian(double sigma2) { return {KernelKind::gaussian, sigma2, nullptr, {}}; }
KernelSpec KernelSpec::linear() { return {KernelKind::linear, 1.0, nullptr, {}}; }
KernelSpec KernelSpec::tanimoto() { return {KernelKind::tanimoto, 1.0, nullptr, {}}; }
KernelSpec KernelSpec::gaussian_tanimoto(double sigma2) { return {KernelKind::gaussian_tanimoto, sigma2, nullptr, {}}; }
KernelSpec KernelSpec::precomputed(std::shared_ptr<const Eigen::MatrixXd> gram, std::string path) {
  return {KernelKind::precomputed, 1.0, std::move(gram), std::move(path)};
}

void KernelSpec::validate() const {
  if ((kind == KernelKind::gaussian || kind == KernelKind::gaussian_tanimoto) && !(sigma2 > 0.0))
    throw std::invalid_argument("kernel sigma2 must be positive, got " + std::to_string(sigma2));
  if (kind == KernelKind::precomputed && !source) throw std::invalid_argument("precomputed kernel has no Gram matrix");
}

bool KernelSpec::is_normalized() const {
  return kind == KernelKind::gaussian || kind == KernelKind::gaussian_tanimoto || kind == KernelKind::tanimoto;
}

namespace {

// Row-block parallel A * B^T.
Eigen::MatrixXd inner_products(const SampleMatrix& a, const SampleMatrix& b) {
  Eigen::MatrixXd out(a.rows(), b.rows());
  constexpr std::size_t block = 256;
  const std::size_t blocks = (static_cast<std::size_t>(a.rows()) + block - 1) / block;
  parallel_for(blocks, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t blk = lo; blk < hi; ++blk) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(blk * block);
      const Eigen::Index rows = std::min<Eigen::Index>(static_cast<Eigen::Index>(block), a.rows() - r0);
      out.middleRows(r0, rows).noalias() = a.middleRows(r0, rows) * b.transpose();
    }
  });
  return out;
}

void check_tanimoto_rows(const Eigen::VectorXd& sq_norms) {
  for (Eigen::Index i = 0; i < sq_norms.size(); ++i)
    if (!(sq_norms(i) > 0.0))
      throw DataError("tanimoto kernel: row " + std::to_string(i) + " has no nonzero entry");
}

Eigen::Index as_index(double v, Eigen::Index bound) {
  const double r = std::round(v);
  if (r != v || r < 0 || r >= static_cast<double>(bound))
    throw DataError("precomputed kernel: index " + std::to_string(v) + " out of range [0, " + std::to_string(bound) +
                    ")");
  return static_cast<Eigen::Index>(r);
}

Eigen::MatrixXd precomputed_block(const KernelSpec& spec, const SampleMatrix& a, const SampleMatrix& b) {
  const Eigen::MatrixXd& src = *spec.source;
  if (a.cols() != 1 || b.cols() != 1) throw DataError("precomputed kernel expects one index column per sample");
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const Eigen::Index ai = as_index(a(i, 0), src.rows());
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const double v = src(ai, as_index(b(j, 0), src.cols()));
      if (std::isnan(v))
        throw DataError("precomputed kernel: entry (" + std::to_string(a(i, 0)) + ", " + std::to_string(b(j, 0)) +
                        ") was not provided");
      out(i, j) = v;
    }
  }
  return out;
}

Eigen::MatrixXd tanimoto_from(const Eigen::MatrixXd& ip, const Eigen::VectorXd& na, const Eigen::VectorXd& nb) {
  Eigen::MatrixXd out(ip.rows(), ip.cols());
  for (Eigen::Index j = 0; j < ip.cols(); ++j)
    for (Eigen::Index i = 0; i < ip.rows(); ++i) out(i, j) = ip(i, j) / (na(i) + nb(j) - ip(i, j));
  return out;
}

Eigen::MatrixXd compute(const KernelSpec& spec, const SampleMatrix& a, const SampleMatrix& b, bool self) {
  spec.validate();
  if (spec.kind == KernelKind::precomputed) return precomputed_block(spec, a, b);
  if (a.cols() != b.cols())
    throw DataError("kernel: feature dimension mismatch (" + std::to_string(a.cols()) + " vs " +
                    std::to_string(b.cols()) + ")");

  Eigen::MatrixXd ip = inner_products(a, b);
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = self ? na : Eigen::VectorXd(b.rowwise().squaredNorm());

  switch (spec.kind) {
    case KernelKind::linear:
      return ip;
    case KernelKind::gaussian: {
      const double scale = -0.5 / spec.sigma2;
      for (Eigen::Index j = 0; j < ip.cols(); ++j)
        for (Eigen::Index i = 0; i < ip.rows(); ++i) {
          const double d2 = (self && i == j) ? 0.0 : std::max(0.0, na(i) + nb(j) - 2.0 * ip(i, j));
          ip(i, j) = std::exp(scale * d2);
        }
      return ip;
    }
    case KernelKind::tanimoto:
      check_tanimoto_rows(na);
      check_tanimoto_rows(nb);
      return tanimoto_from(ip, na, nb);
    case KernelKind::gaussian_tanimoto: {
      check_tanimoto_rows(na);
      check_tanimoto_rows(nb);
      Eigen::MatrixXd t = tanimoto_from(ip, na, nb);
      const double scale = -0.5 / spec.sigma2;
      // k_T(a, a) = 1, so d_T^2 = 2 - 2 k_T(a, b).
      for (Eigen::Index j = 0; j < t.cols(); ++j)
        for (Eigen::Index i = 0; i < t.rows(); ++i) {
          const double d2 = (self && i == j) ? 0.0 : std::max(0.0, 2.0 - 2.0 * t(i, j));
          t(i, j) = std::exp(scale * d2);
        }
      return t;
    }
    case KernelKind::precomputed:
      break;
  }
  throw std::logic_error("unreachable kernel kind");
}

}  // namespace

Eigen::MatrixXd gram(const KernelSpec& spec, const SampleMatrix& a, const SampleMatrix& b) {
  return compute(spec, a, b, false);
}

Eigen::MatrixXd self_gram(const KernelSpec& spec, const SampleMatrix& a) {
  Eigen::MatrixXd k = compute(spec, a, a, true);
  if (spec.kind == KernelKind::precomputed) {
    const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
    if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
      throw DataError("precomputed kernel: self-Gram is not symmetric");
  }
  k.triangularView<Eigen::StrictlyLower>() = k.transpose();
  return k;
}

Eigen::VectorXd self_norms(const KernelSpec& spec, const SampleMatrix& y) {
  spec.validate();
  Eigen::VectorXd out(y.rows());
  if (spec.kind == KernelKind::precomputed) {
    for (Eigen::Index i = 0; i < y.rows(); ++i) out(i) = precomputed_block(spec, y.row(i), y.row(i))(0, 0);
    return out;
  }
  const Eigen::VectorXd sq = y.rowwise().squaredNorm();
  switch (spec.kind) {
    case KernelKind::linear:
      return sq;
    case KernelKind::tanimoto:
    case KernelKind::gaussian_tanimoto:
      check_tanimoto_rows(sq);
      [[fallthrough]];
    case KernelKind::gaussian:
      return Eigen::VectorXd::Ones(y.rows());
    case KernelKind::precomputed:
      break;
  }
  throw std::logic_error("unreachable kernel kind");
}

Permutation::Permutation(std::vector<int> ranks) : ranks_(std::move(ranks)) {
  std::vector<char> seen(ranks_.size(), 0);
  for (int r : ranks_) {
    if (r < 1 || r > static_cast<int>(ranks_.size()) || seen[static_cast<std::size_t>(r - 1)])
      throw std::invalid_argument("permutation: ranks must be a bijection onto 1..K");
    seen[static_cast<std::size_t>(r - 1)] = 1;
  }
}

Eigen::VectorXd kemeny_embed(const Permutation& sigma) {
  const int k = sigma.size();
  Eigen::VectorXd out(k * (k - 1) / 2);
  Eigen::Index pos = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) out(pos++) = sigma.rank(j) > sigma.rank(i) ? 1.0 : -1.0;
  return out;
}

int kemeny_items(Eigen::Index pairs) {
  int k = 1;
  while (static_cast<Eigen::Index>(k) * (k - 1) / 2 < pairs) ++k;
  if (static_cast<Eigen::Index>(k) * (k - 1) / 2 != pairs)
    throw std::invalid_argument("kemeny: length " + std::to_string(pairs) + " is not K(K-1)/2");
  return k;
}

Permutation permutation_from_kemeny(const Eigen::VectorXd& embedding) {
  const int k = kemeny_items(embedding.size());
  // rank(i) = 1 + number of items ranked before i.
  std::vector<int> ranks(static_cast<std::size_t>(k), 1);
  Eigen::Index pos = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      if (embedding(pos++) > 0)
        ++ranks[static_cast<std::size_t>(j)];
      else
        ++ranks[static_cast<std::size_t>(i)];
    }
  return Permutation(std::move(ranks));
}

}  // namespace oel
