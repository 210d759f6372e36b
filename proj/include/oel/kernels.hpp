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
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace oel {

// Sample matrices hold one item per row. For precomputed kernels each row has
// a single column holding the item's index into the stored Gram matrix.
using SampleMatrix = Eigen::MatrixXd;

enum class KernelKind { gaussian, linear, tanimoto, gaussian_tanimoto, precomputed };

std::string_view to_string(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view name);

struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  // Width for gaussian kinds: k(a, b) = exp(-d^2(a, b) / (2 sigma2)).
  double sigma2 = 1.0;
  // Stored Gram for the precomputed kind. Entries that were never provided
  // are NaN; reading one is an error.
  std::shared_ptr<const Eigen::MatrixXd> source;
  // Where `source` was read from; informational, kept for manifests.
  std::string path;

  static KernelSpec gaussian(double sigma2);
  static KernelSpec linear();
  static KernelSpec tanimoto();
  static KernelSpec gaussian_tanimoto(double sigma2);
  static KernelSpec precomputed(std::shared_ptr<const Eigen::MatrixXd> gram, std::string path = {});

  // Throws std::invalid_argument when sigma2 <= 0 for gaussian kinds or a
  // precomputed spec has no source.
  void validate() const;

  // Kernels with k(y, y) = 1 for every y.
  bool is_normalized() const;
};

// Entry (i, j) = k(a_i, b_j).
Eigen::MatrixXd gram(const KernelSpec& spec, const SampleMatrix& a, const SampleMatrix& b);

// gram(spec, a, a), computed on the upper triangle and mirrored so the result
// is exactly symmetric.
Eigen::MatrixXd self_gram(const KernelSpec& spec, const SampleMatrix& a);

// Entry i = k(y_i, y_i) = ||psi(y_i)||^2.
Eigen::VectorXd self_norms(const KernelSpec& spec, const SampleMatrix& y);

// A ranking of K items: ranks[i] is the rank sigma(i) of item i, 1-based.
class Permutation {
 public:
  // Throws std::invalid_argument unless ranks is a bijection onto 1..K.
  explicit Permutation(std::vector<int> ranks);

  int size() const { return static_cast<int>(ranks_.size()); }
  int rank(int item) const { return ranks_[static_cast<std::size_t>(item)]; }
  const std::vector<int>& ranks() const { return ranks_; }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> ranks_;
};

// Kemeny embedding: entry for pair (i, j), i < j in lexicographic order, is
// sign(sigma(j) - sigma(i)). Length K(K-1)/2, unnormalized.
Eigen::VectorXd kemeny_embed(const Permutation& sigma);

// Inverse of kemeny_embed for vectors with entries in {-1, +1} that encode a
// consistent total order.
Permutation permutation_from_kemeny(const Eigen::VectorXd& embedding);

// Number of items K with K(K-1)/2 == pairs; throws if none exists.
int kemeny_items(Eigen::Index pairs);

}  // namespace oel
