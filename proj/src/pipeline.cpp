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

#include "oel/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "oel/errors.hpp"
#include "oel/log.hpp"
#include "oel/metrics.hpp"
#include "oel/rng.hpp"

namespace oel {

FitOptions FitOptions::seeded(std::uint64_t root) {
  FitOptions opt;
  opt.anchor_seed = stream_seed(root, "anchors");
  opt.sketch_seed = stream_seed(root, "sketch");
  return opt;
}

KernelSpec input_kernel_for(const KernelSpec& base, const HyperParams& params) {
  KernelSpec spec = base;
  const bool gaussian = spec.kind == KernelKind::gaussian || spec.kind == KernelKind::gaussian_tanimoto;
  if (gaussian && params.sigma2 > 0.0) spec.sigma2 = params.sigma2;
  return spec;
}

KrrStage fit_krr_stage(const Dataset& train, const HyperParams& params, const FitOptions& options, bool with_unsup) {
  const Eigen::Index n = train.n();
  if (!(params.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const KernelSpec input_kernel = input_kernel_for(train.input_kernel, params);
  input_kernel.validate();

  const Eigen::MatrixXd kx = self_gram(input_kernel, train.inputs);
  auto krr = [&] {
    if (params.q <= 0) return fit_krr(kx, params.lambda);
    Eigen::Index q = params.q;
    if (q > n) {
      log_warning("q = " + std::to_string(q) + " exceeds n = " + std::to_string(n) + ", using q = n");
      q = n;
    }
    auto anchors = sample_anchors(n, q, options.anchor_seed);
    Eigen::MatrixXd cols(n, q), qq(q, q);
    for (Eigen::Index j = 0; j < q; ++j) cols.col(j) = kx.col(anchors[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < q; ++i) qq.row(i) = cols.row(anchors[static_cast<std::size_t>(i)]);
    return fit_krr_nystrom(cols, qq, params.lambda, std::move(anchors));
  }();
  KrrStage stage{input_kernel, std::move(krr), nullptr, nullptr, nullptr, nullptr};
  if (stage.krr.mode() == KrrMode::nystrom)
    stage.a = std::make_shared<const Eigen::MatrixXd>(predict_alpha(stage.krr, select_rows(kx, stage.krr.anchors())));
  else
    stage.a = std::make_shared<const Eigen::MatrixXd>(predict_alpha(stage.krr, kx));
  stage.ky_ss = std::make_shared<const Eigen::MatrixXd>(self_gram(train.output_kernel, train.outputs));
  if (with_unsup && train.m() > 0) {
    stage.ky_su = std::make_shared<const Eigen::MatrixXd>(gram(train.output_kernel, train.outputs, train.unsup_outputs));
    stage.ky_uu = std::make_shared<const Eigen::MatrixXd>(self_gram(train.output_kernel, train.unsup_outputs));
  } else {
    stage.ky_su = std::make_shared<const Eigen::MatrixXd>(n, 0);
    stage.ky_uu = std::make_shared<const Eigen::MatrixXd>(0, 0);
  }
  return stage;
}

MixedGram stage_gram(const KrrStage& stage, double c) {
  return assemble_mixed_gram(stage.a, stage.ky_ss, stage.ky_su, *stage.ky_uu, c);
}

Predictor make_predictor(const Dataset& train, const KrrStage& stage, const HyperParams& params,
                         std::optional<OelModel> oel) {
  return Predictor{stage.input_kernel,
                   train.output_kernel,
                   train.inputs,
                   train.outputs,
                   oel ? train.unsup_outputs : SampleMatrix(0, train.outputs.cols()),
                   params,
                   stage.krr,
                   stage.ky_ss,
                   std::move(oel)};
}

Predictor fit_predictor(const Dataset& train, const HyperParams& params, const FitOptions& options) {
  const KrrStage stage = fit_krr_stage(train, params, options, !options.iokr_only);
  if (options.iokr_only) return make_predictor(train, stage, params, std::nullopt);

  const MixedGram g = stage_gram(stage, params.c);
  OelOptions opt;
  opt.p = static_cast<int>(std::min<Eigen::Index>(params.p, g.n + g.m));
  opt.method = options.eig;
  opt.sketch = SketchOptions{options.oversample, options.power_iters, options.sketch_seed};
  if (opt.p < params.p)
    log_warning("p = " + std::to_string(params.p) + " exceeds n + m = " + std::to_string(g.n + g.m) + ", using " +
                std::to_string(opt.p));
  return make_predictor(train, stage, params, fit_oel(g, opt));
}

Eigen::MatrixXd predict_alphas(const Predictor& model, const SampleMatrix& x) {
  if (model.krr.mode() == KrrMode::nystrom)
    return predict_alpha(model.krr, gram(model.input_kernel, select_rows(model.train_inputs, model.krr.anchors()), x));
  return predict_alpha(model.krr, gram(model.input_kernel, model.train_inputs, x));
}

CandidateBlocks candidate_blocks(const Predictor& model, const SampleMatrix& candidates) {
  CandidateBlocks b;
  b.c_s = gram(model.output_kernel, model.train_outputs, candidates);
  b.self_norms = self_norms(model.output_kernel, candidates);
  if (model.oel) {
    const Eigen::MatrixXd c_u = model.oel->m() > 0 ? gram(model.output_kernel, model.unsup_outputs, candidates)
                                                   : Eigen::MatrixXd(0, candidates.rows());
    b.z = embed_candidates(*model.oel, b.c_s, c_u);
  }
  return b;
}

std::vector<Ranking> predict_rankings(const Predictor& model, const SampleMatrix& x, const CandidateBlocks& cands,
                                      int k, QueryCandidates query_cands, bool force_iokr) {
  const Eigen::MatrixXd alpha = predict_alphas(model, x);
  if (model.oel && !force_iokr)
    return decode_oel(embed_tests(*model.oel, alpha), cands.z, cands.self_norms, k, query_cands);
  return decode_iokr(alpha, cands.c_s, cands.self_norms, k, query_cands);
}

Eigen::VectorXd surrogate_errors(const Predictor& model, const SampleMatrix& x, const SampleMatrix& y) {
  if (x.rows() != y.rows()) throw DataError("surrogate_errors: inputs and outputs differ in count");
  const Eigen::MatrixXd alpha = predict_alphas(model, x);
  const Eigen::MatrixXd k_sy = gram(model.output_kernel, model.train_outputs, y);
  const Eigen::VectorXd k_yy = self_norms(model.output_kernel, y);
  Eigen::VectorXd err(y.rows());
  if (model.oel) {
    const Eigen::MatrixXd c_u = model.oel->m() > 0 ? gram(model.output_kernel, model.unsup_outputs, y)
                                                   : Eigen::MatrixXd(0, y.rows());
    const Eigen::MatrixXd z = embed_tests(*model.oel, alpha);
    const Eigen::MatrixXd z_y = embed_candidates(*model.oel, k_sy, c_u);
    for (Eigen::Index j = 0; j < y.rows(); ++j)
      err(j) = z.col(j).squaredNorm() - 2.0 * z.col(j).dot(z_y.col(j)) + k_yy(j);
  } else {
    const Eigen::MatrixXd k_alpha = *model.ky_ss * alpha;
    for (Eigen::Index j = 0; j < y.rows(); ++j)
      err(j) = alpha.col(j).dot(k_alpha.col(j)) - 2.0 * alpha.col(j).dot(k_sy.col(j)) + k_yy(j);
  }
  return err.cwiseMax(0.0);
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::surrogate: return "surrogate";
    case Metric::rkhs_loss: return "rkhs";
    case Metric::f1: return "f1";
    case Metric::hamming: return "hamming";
    case Metric::kendall: return "kendall";
    case Metric::top1: return "top1";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  for (auto m : {Metric::surrogate, Metric::rkhs_loss, Metric::f1, Metric::hamming, Metric::kendall, Metric::top1})
    if (name == to_string(m)) return m;
  throw UsageError("unknown metric '" + std::string(name) + "'");
}

bool lower_is_better(Metric metric) {
  return metric == Metric::surrogate || metric == Metric::rkhs_loss || metric == Metric::hamming;
}

double evaluate_predictor(const Predictor& model, const Dataset& data, Metric metric) {
  if (!data.has_test() || data.test_outputs.rows() != data.n_test())
    throw DataError("evaluation needs test inputs with matching test outputs");
  const SampleMatrix& y = data.test_outputs;
  if (metric == Metric::surrogate) return surrogate_errors(model, data.test_inputs, y).mean();

  if ((metric == Metric::f1 || metric == Metric::hamming) && data.output_kind != OutputKind::bitset)
    throw UsageError(std::string(to_string(metric)) + " needs bitset outputs");
  if (metric == Metric::kendall && data.output_kind != OutputKind::permutation)
    throw UsageError("kendall needs permutation outputs");

  const CandidateBlocks blocks = candidate_blocks(model, data.candidates);
  const auto rankings = predict_rankings(model, data.test_inputs, blocks, 1, data.query_candidates);
  if (metric == Metric::top1) return topk_accuracy(rankings, find_rows(data.candidates, y), {1}).front();

  Eigen::MatrixXd pred(y.rows(), data.candidates.cols());
  for (Eigen::Index j = 0; j < y.rows(); ++j)
    pred.row(j) = data.candidates.row(rankings[static_cast<std::size_t>(j)].candidates.front());

  double total = 0.0;
  switch (metric) {
    case Metric::rkhs_loss: {
      const Eigen::VectorXd k_yy = self_norms(model.output_kernel, y);
      const Eigen::VectorXd k_pp = self_norms(model.output_kernel, pred);
      for (Eigen::Index j = 0; j < y.rows(); ++j) {
        const double k_yp = gram(model.output_kernel, y.row(j), pred.row(j))(0, 0);
        total += rkhs_loss(k_yy(j), k_pp(j), k_yp);
      }
      break;
    }
    case Metric::f1:
      return mean_f1(y, pred);
    case Metric::hamming:
      for (Eigen::Index j = 0; j < y.rows(); ++j) total += static_cast<double>(hamming(y.row(j), pred.row(j)));
      break;
    case Metric::kendall:
      for (Eigen::Index j = 0; j < y.rows(); ++j)
        total += kendall_tau(permutation_from_kemeny(y.row(j).transpose()),
                             permutation_from_kemeny(pred.row(j).transpose()));
      break;
    default:
      break;
  }
  return total / static_cast<double>(y.rows());
}

// --------------------------------------------------------------------------
// Bundles

namespace {

std::string exact_text(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
T parse_value(const ModelBundle& b, const std::string& key) {
  const std::string& text = b.value(key);
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw DataError("model bundle: bad value for '" + key + "': '" + text + "'");
  return v;
}

void put_kernel(ModelBundle& b, const std::string& prefix, const KernelSpec& spec) {
  b.manifest[prefix + ".kind"] = std::string(to_string(spec.kind));
  b.manifest[prefix + ".sigma2"] = exact_text(spec.sigma2);
  if (spec.kind == KernelKind::precomputed) {
    b.manifest[prefix + ".path"] = spec.path;
    if (spec.source) b.matrices[prefix + ".gram"] = *spec.source;
  }
}

KernelSpec get_kernel(const ModelBundle& b, const std::string& prefix) {
  KernelSpec spec;
  try {
    spec.kind = parse_kernel_kind(b.value(prefix + ".kind"));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model bundle: ") + e.what());
  }
  spec.sigma2 = parse_value<double>(b, prefix + ".sigma2");
  if (spec.kind == KernelKind::precomputed) {
    spec.path = b.value(prefix + ".path");
    spec.source = std::make_shared<const Eigen::MatrixXd>(b.matrix(prefix + ".gram"));
  }
  return spec;
}

}  // namespace

ModelBundle to_bundle(const Predictor& model) {
  ModelBundle b;
  put_kernel(b, "input_kernel", model.input_kernel);
  put_kernel(b, "output_kernel", model.output_kernel);
  b.manifest["params.lambda"] = exact_text(model.params.lambda);
  b.manifest["params.p"] = std::to_string(model.params.p);
  b.manifest["params.c"] = exact_text(model.params.c);
  b.manifest["params.sigma2"] = exact_text(model.params.sigma2);
  b.manifest["params.q"] = std::to_string(model.params.q);

  b.matrices["train_inputs"] = model.train_inputs;
  b.matrices["train_outputs"] = model.train_outputs;
  b.matrices["unsup_outputs"] = model.unsup_outputs;
  b.matrices["ky_ss"] = *model.ky_ss;

  const KrrModel& krr = model.krr;
  b.manifest["krr.lambda"] = exact_text(krr.lambda());
  if (krr.mode() == KrrMode::exact) {
    b.manifest["krr.mode"] = "exact";
    b.manifest["krr.shift"] = exact_text(krr.solver().shift());
    b.matrices["krr.factor"] = krr.solver().factor();
  } else {
    b.manifest["krr.mode"] = "nystrom";
    Eigen::MatrixXd anchors(static_cast<Eigen::Index>(krr.anchors().size()), 1);
    for (std::size_t i = 0; i < krr.anchors().size(); ++i)
      anchors(static_cast<Eigen::Index>(i), 0) = static_cast<double>(krr.anchors()[i]);
    b.matrices["krr.anchors"] = anchors;
    b.matrices["krr.features"] = krr.features();
    b.matrices["krr.feature_map"] = krr.feature_map();
    b.matrices["krr.normal_factor"] = krr.normal_factor();
  }

  b.manifest["oel.present"] = model.oel ? "true" : "false";
  if (model.oel) {
    const OelModel& o = *model.oel;
    b.manifest["oel.c"] = exact_text(o.c());
    b.manifest["oel.gram_trace"] = exact_text(o.gram_trace());
    b.manifest["oel.requested_p"] = std::to_string(o.requested_p());
    b.manifest["oel.p"] = std::to_string(o.p());
    b.matrices["oel.beta"] = o.beta();
    b.matrices["oel.mu"] = o.mu();
    b.matrices["oel.a"] = o.a();
    b.matrices["oel.ky_su"] = o.ky_su();
  }
  return b;
}

Predictor from_bundle(const ModelBundle& b) {
  HyperParams params;
  params.lambda = parse_value<double>(b, "params.lambda");
  params.p = parse_value<int>(b, "params.p");
  params.c = parse_value<double>(b, "params.c");
  params.sigma2 = parse_value<double>(b, "params.sigma2");
  params.q = parse_value<Eigen::Index>(b, "params.q");

  const double lambda = parse_value<double>(b, "krr.lambda");
  const std::string& mode = b.value("krr.mode");
  auto krr = [&] {
    if (mode == "exact") {
      return KrrModel::exact(RegularizedSolver(b.matrix("krr.factor"), parse_value<double>(b, "krr.shift")), lambda);
    }
    if (mode == "nystrom") {
      const Eigen::MatrixXd& a = b.matrix("krr.anchors");
      std::vector<Eigen::Index> anchors(static_cast<std::size_t>(a.rows()));
      for (Eigen::Index i = 0; i < a.rows(); ++i) anchors[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(a(i, 0));
      return KrrModel::nystrom(std::move(anchors), b.matrix("krr.features"), b.matrix("krr.feature_map"),
                               b.matrix("krr.normal_factor"), lambda);
    }
    throw DataError("model bundle: unknown krr.mode '" + mode + "'");
  }();

  auto ky_ss = std::make_shared<const Eigen::MatrixXd>(b.matrix("ky_ss"));
  std::optional<OelModel> oel;
  const std::string& present = b.value("oel.present");
  if (present == "true") {
    const Eigen::MatrixXd& mu = b.matrix("oel.mu");
    oel.emplace(b.matrix("oel.beta"), Eigen::VectorXd(mu.col(0)), parse_value<double>(b, "oel.c"),
                std::make_shared<const Eigen::MatrixXd>(b.matrix("oel.a")), ky_ss,
                std::make_shared<const Eigen::MatrixXd>(b.matrix("oel.ky_su")),
                parse_value<double>(b, "oel.gram_trace"), parse_value<int>(b, "oel.requested_p"));
  } else if (present != "false") {
    throw DataError("model bundle: bad oel.present '" + present + "'");
  }

  return Predictor{get_kernel(b, "input_kernel"), get_kernel(b, "output_kernel"), b.matrix("train_inputs"),
                   b.matrix("train_outputs"),     b.matrix("unsup_outputs"),        params,
                   std::move(krr),                std::move(ky_ss),                 std::move(oel)};
}

}  // namespace oel
