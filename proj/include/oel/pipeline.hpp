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
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "oel/dataio.hpp"
#include "oel/decode.hpp"
#include "oel/embedding.hpp"
#include "oel/kernels.hpp"
#include "oel/krr.hpp"

namespace oel {

struct HyperParams {
  double lambda = 1e-3;
  int p = 10;
  double c = 1.0;
  // Input kernel width for gaussian kinds; 0 keeps the dataset's width.
  double sigma2 = 0.0;
  // Nystrom anchors; 0 means exact KRR.
  Eigen::Index q = 0;
};

struct FitOptions {
  bool iokr_only = false;
  EigMethod eig = EigMethod::exact;
  int oversample = 10;
  int power_iters = 2;
  std::uint64_t anchor_seed = 0;  // Nystrom anchor sampling
  std::uint64_t sketch_seed = 0;  // randomized eigensolver

  /// Anchor and sketch seeds as the "anchors" and "sketch" streams of root.
  static FitOptions seeded(std::uint64_t root);
};

/// Input kernel with the width taken from params when it has one.
KernelSpec input_kernel_for(const KernelSpec& base, const HyperParams& params);

/// Everything fixed by (input kernel, lambda, q): the surrogate regression
/// and the output Gram blocks. Shared across (p, c).
struct KrrStage {
  KernelSpec input_kernel;
  KrrModel krr;
  std::shared_ptr<const Eigen::MatrixXd> a;      // n x n, alpha(x_i) in column i
  std::shared_ptr<const Eigen::MatrixXd> ky_ss;  // n x n
  std::shared_ptr<const Eigen::MatrixXd> ky_su;  // n x m
  std::shared_ptr<const Eigen::MatrixXd> ky_uu;  // m x m
};

/// Output blocks against unsupervised outputs are computed only when
/// with_unsup is set.
KrrStage fit_krr_stage(const Dataset& train, const HyperParams& params, const FitOptions& options, bool with_unsup);

MixedGram stage_gram(const KrrStage& stage, double c);

/// A fitted structured predictor. Without an OEL model it decodes in the
/// full output space.
struct Predictor {
  KernelSpec input_kernel;
  KernelSpec output_kernel;
  SampleMatrix train_inputs;
  SampleMatrix train_outputs;
  SampleMatrix unsup_outputs;
  HyperParams params;
  KrrModel krr;
  std::shared_ptr<const Eigen::MatrixXd> ky_ss;
  std::optional<OelModel> oel;

  bool uses_oel() const { return oel.has_value(); }
};

/// OEL with params.p capped at n + m, or plain IOKR with options.iokr_only.
/// The training set's unsupervised outputs enter the OEL fit.
Predictor fit_predictor(const Dataset& train, const HyperParams& params, const FitOptions& options);

Predictor make_predictor(const Dataset& train, const KrrStage& stage, const HyperParams& params,
                         std::optional<OelModel> oel);

/// n x t, column j = alpha(x_j).
Eigen::MatrixXd predict_alphas(const Predictor& model, const SampleMatrix& x);

/// Candidate-side blocks, computed once per candidate set.
struct CandidateBlocks {
  Eigen::MatrixXd c_s;  // n x N, k(y_i, cand)
  Eigen::MatrixXd z;    // p x N OEL embeddings; empty without OEL
  Eigen::VectorXd self_norms;
};

CandidateBlocks candidate_blocks(const Predictor& model, const SampleMatrix& candidates);

/// Top-k rankings of candidates for each row of x, in the OEL space when the
/// model has one and force_iokr is false.
std::vector<Ranking> predict_rankings(const Predictor& model, const SampleMatrix& x, const CandidateBlocks& cands,
                                      int k, QueryCandidates query_cands = {}, bool force_iokr = false);

/// Squared distance between the surrogate prediction and psi(y) for each
/// (x_j, y_j): ||G^T G h(x) - psi(y)||^2 with OEL, ||h(x) - psi(y)||^2 without.
Eigen::VectorXd surrogate_errors(const Predictor& model, const SampleMatrix& x, const SampleMatrix& y);

enum class Metric { surrogate, rkhs_loss, f1, hamming, kendall, top1 };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);
bool lower_is_better(Metric metric);

/// Mean of the metric over data.test_inputs / data.test_outputs, decoding
/// against data.candidates (and data.query_candidates when present).
double evaluate_predictor(const Predictor& model, const Dataset& data, Metric metric);

/// Bundle layout: manifest keys for kernels, hyperparameters and scalars,
/// matrices for the training samples and fitted factors. Loading restores
/// a predictor whose predictions are bit-identical to the saved one.
ModelBundle to_bundle(const Predictor& model);
Predictor from_bundle(const ModelBundle& bundle);

}  // namespace oel
