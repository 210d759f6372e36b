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

#include <vector>

#include "doctest.h"
#include "oel/dataio.hpp"
#include "oel/errors.hpp"
#include "oel/log.hpp"
#include "oel/pipeline.hpp"
#include "oracles.hpp"

using namespace oel;
using namespace oel::testing;

namespace {

struct Quiet {
  std::vector<std::string> warnings;
  Quiet() {
    set_log_sink([this](LogLevel level, std::string_view msg) {
      if (level == LogLevel::warning) warnings.emplace_back(msg);
    });
  }
  ~Quiet() { set_log_sink(nullptr); }
};

// Gaussian inputs in R^3 and linear outputs in R^4 drawn from a noisy linear map.
Dataset regression_data(Eigen::Index n, Eigen::Index m, Eigen::Index t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd w = random_matrix(3, 4, rng);
  Dataset d;
  d.input_kernel = KernelSpec::gaussian(2.0);
  d.output_kernel = KernelSpec::linear();
  d.inputs = random_matrix(n, 3, rng);
  d.outputs = d.inputs * w + 0.1 * random_matrix(n, 4, rng);
  d.unsup_outputs = random_matrix(m, 3, rng) * w;
  d.test_inputs = random_matrix(t, 3, rng);
  d.test_outputs = d.test_inputs * w;
  d.candidates = stack_rows(stack_rows(d.outputs, d.unsup_outputs), d.test_outputs);
  for (Eigen::Index i = 0; i < d.candidates.rows(); ++i) d.candidate_ids.push_back(std::to_string(i));
  d.validate();
  return d;
}

void check_same_rankings(const std::vector<Ranking>& a, const std::vector<Ranking>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(a[j].candidates == b[j].candidates);
    CHECK(a[j].scores == b[j].scores);
  }
}

Predictor round_trip(const Predictor& model) {
  TempDir dir("pipeline");
  save_model(to_bundle(model), dir.path);
  return from_bundle(load_model(dir.path));
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("saved and loaded predictors predict bit-identically") {
    const Dataset d = regression_data(30, 20, 10, 1);
    for (bool iokr : {false, true}) {
      HyperParams hp;
      hp.lambda = 1e-2;
      hp.p = 3;
      hp.c = 0.5;
      FitOptions opt = FitOptions::seeded(4);
      opt.iokr_only = iokr;
      const Predictor model = fit_predictor(d, hp, opt);
      CHECK(model.uses_oel() == !iokr);
      const Predictor back = round_trip(model);
      CHECK(back.uses_oel() == model.uses_oel());
      CHECK(predict_alphas(back, d.test_inputs) == predict_alphas(model, d.test_inputs));
      const CandidateBlocks ca = candidate_blocks(model, d.candidates);
      const CandidateBlocks cb = candidate_blocks(back, d.candidates);
      CHECK(ca.z == cb.z);
      check_same_rankings(predict_rankings(model, d.test_inputs, ca, 5), predict_rankings(back, d.test_inputs, cb, 5));
      if (!iokr) CHECK(back.oel->beta() == model.oel->beta());
    }
  }

  TEST_CASE("nystrom predictors round trip") {
    const Dataset d = regression_data(40, 10, 8, 2);
    HyperParams hp;
    hp.lambda = 1e-2;
    hp.p = 2;
    hp.c = 0.75;
    hp.q = 15;
    const Predictor model = fit_predictor(d, hp, FitOptions::seeded(9));
    CHECK(model.krr.mode() == KrrMode::nystrom);
    CHECK(model.krr.basis_size() == 15);
    const Predictor back = round_trip(model);
    CHECK(back.krr.anchors() == model.krr.anchors());
    CHECK(predict_alphas(back, d.test_inputs) == predict_alphas(model, d.test_inputs));
  }

  TEST_CASE("precomputed kernels round trip") {
    const Dataset base = regression_data(12, 0, 4, 3);
    Dataset d = base;
    const Eigen::MatrixXd pool_x = stack_rows(base.inputs, base.test_inputs);
    auto pool = std::make_shared<const Eigen::MatrixXd>(self_gram(KernelSpec::gaussian(2.0), pool_x));
    d.input_kernel = KernelSpec::precomputed(pool, "pool.bin");
    d.inputs.resize(12, 1);
    d.test_inputs.resize(4, 1);
    for (Eigen::Index i = 0; i < 12; ++i) d.inputs(i, 0) = static_cast<double>(i);
    for (Eigen::Index i = 0; i < 4; ++i) d.test_inputs(i, 0) = static_cast<double>(12 + i);
    HyperParams hp;
    hp.lambda = 1e-2;
    hp.p = 3;
    hp.c = 1.0;
    const Predictor model = fit_predictor(d, hp, FitOptions::seeded(1));
    const Predictor back = round_trip(model);
    CHECK(predict_alphas(back, d.test_inputs) == predict_alphas(model, d.test_inputs));
    // Same predictions as with the explicit kernel.
    const Predictor direct = fit_predictor(base, hp, FitOptions::seeded(1));
    CHECK((predict_alphas(direct, base.test_inputs) - predict_alphas(model, d.test_inputs)).cwiseAbs().maxCoeff() <=
          1e-12);
  }

  TEST_CASE("full-rank OEL ranks like IOKR") {
    const Dataset d = regression_data(25, 15, 12, 4);
    HyperParams hp;
    hp.lambda = 1e-3;
    hp.p = 4;  // rank of the linear output Gram in R^4
    hp.c = 0.5;
    const Predictor model = fit_predictor(d, hp, FitOptions::seeded(2));
    const CandidateBlocks cands = candidate_blocks(model, d.candidates);
    const auto oel = predict_rankings(model, d.test_inputs, cands, 20);
    const auto iokr = predict_rankings(model, d.test_inputs, cands, 20, {}, true);
    for (std::size_t j = 0; j < oel.size(); ++j) {
      CHECK(oel[j].candidates == iokr[j].candidates);
      for (std::size_t i = 0; i < oel[j].scores.size(); ++i)
        CHECK(std::abs(oel[j].scores[i] - iokr[j].scores[i]) <= 1e-8);
    }
  }

  TEST_CASE("surrogate errors match the explicit feature computation") {
    const Dataset d = regression_data(20, 10, 6, 5);
    HyperParams hp;
    hp.lambda = 1e-2;
    hp.p = 2;
    hp.c = 0.6;
    const Predictor model = fit_predictor(d, hp, FitOptions::seeded(3));
    FitOptions iokr_opt = FitOptions::seeded(3);
    iokr_opt.iokr_only = true;
    const Predictor iokr = fit_predictor(d, hp, iokr_opt);

    const Eigen::MatrixXd kx = self_gram(d.input_kernel, d.inputs);
    const Eigen::MatrixXd alpha_train = ridge_alpha(kx, hp.lambda, kx);
    const Eigen::MatrixXd alpha = ridge_alpha(kx, hp.lambda, gram(d.input_kernel, d.inputs, d.test_inputs));
    const ExplicitOel e = explicit_oel(alpha_train, d.outputs, d.unsup_outputs, hp.c);
    const Eigen::MatrixXd proj = top_projector(e.v, hp.p);
    const Eigen::MatrixXd h = d.outputs.transpose() * alpha;  // 4 x t

    const Eigen::VectorXd se_oel = surrogate_errors(model, d.test_inputs, d.test_outputs);
    const Eigen::VectorXd se_iokr = surrogate_errors(iokr, d.test_inputs, d.test_outputs);
    for (Eigen::Index j = 0; j < 6; ++j) {
      const Eigen::VectorXd y = d.test_outputs.row(j).transpose();
      CHECK(std::abs(se_oel(j) - (proj * h.col(j) - y).squaredNorm()) <= 1e-8);
      CHECK(std::abs(se_iokr(j) - (h.col(j) - y).squaredNorm()) <= 1e-8);
    }
    CHECK(evaluate_predictor(model, d, Metric::surrogate) == doctest::Approx(se_oel.mean()).epsilon(1e-12));
  }

  TEST_CASE("p and q are capped with a warning") {
    const Dataset d = regression_data(6, 2, 2, 6);
    Quiet quiet;
    HyperParams hp;
    hp.lambda = 1e-2;
    hp.p = 50;
    hp.c = 0.5;
    hp.q = 99;
    const Predictor model = fit_predictor(d, hp, FitOptions::seeded(1));
    CHECK(model.krr.basis_size() == 6);
    CHECK(model.oel->requested_p() == 8);
    bool saw_p = false, saw_q = false;
    for (const auto& w : quiet.warnings) {
      saw_p = saw_p || w.find("p = 50") != std::string::npos;
      saw_q = saw_q || w.find("q = 99") != std::string::npos;
    }
    CHECK(saw_p);
    CHECK(saw_q);
  }

  TEST_CASE("stage Gram equals direct assembly") {
    const Dataset d = regression_data(10, 5, 0, 7);
    HyperParams hp;
    hp.lambda = 0.1;
    const KrrStage stage = fit_krr_stage(d, hp, FitOptions::seeded(1), true);
    const Eigen::MatrixXd kx = self_gram(d.input_kernel, d.inputs);
    CHECK((*stage.a - ridge_alpha(kx, 0.1, kx)).cwiseAbs().maxCoeff() <= 1e-10);
    const MixedGram g = stage_gram(stage, 0.3);
    const MixedGram want = assemble_mixed_gram(*stage.a, d.outputs * d.outputs.transpose(),
                                               d.outputs * d.unsup_outputs.transpose(),
                                               d.unsup_outputs * d.unsup_outputs.transpose(), 0.3);
    CHECK((g.k - want.k).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("sigma2 in the hyperparameters sets the input width") {
    HyperParams hp;
    hp.sigma2 = 0.25;
    CHECK(input_kernel_for(KernelSpec::gaussian(1.0), hp).sigma2 == 0.25);
    CHECK(input_kernel_for(KernelSpec::linear(), hp).kind == KernelKind::linear);
  }

  TEST_CASE("metric names and label-type checks") {
    CHECK(parse_metric("rkhs") == Metric::rkhs_loss);
    CHECK(parse_metric(to_string(Metric::kendall)) == Metric::kendall);
    CHECK_THROWS_AS(parse_metric("mse"), UsageError);
    CHECK(lower_is_better(Metric::hamming));
    CHECK_FALSE(lower_is_better(Metric::f1));
    const Dataset d = regression_data(8, 0, 3, 8);
    HyperParams hp;
    hp.p = 2;
    const Predictor model = fit_predictor(d, hp, FitOptions::seeded(1));
    CHECK_THROWS_AS(evaluate_predictor(model, d, Metric::f1), UsageError);
    CHECK_THROWS_AS(evaluate_predictor(model, d, Metric::kendall), UsageError);
    CHECK(evaluate_predictor(model, d, Metric::rkhs_loss) >= 0.0);
    CHECK(evaluate_predictor(model, d, Metric::top1) >= 0.0);
  }

  TEST_CASE("bitset evaluation") {
    Dataset d;
    d.output_kind = OutputKind::bitset;
    d.input_kernel = KernelSpec::gaussian(1.0);
    d.output_kernel = KernelSpec::linear();
    d.inputs.resize(4, 1);
    d.inputs << 0, 1, 2, 3;
    d.outputs.resize(4, 3);
    d.outputs << 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 0;
    d.unsup_outputs.resize(0, 3);
    d.test_inputs = d.inputs;
    d.test_outputs = d.outputs;
    d.candidates = d.outputs;
    d.candidate_ids = {"a", "b", "c", "d"};
    HyperParams hp;
    hp.lambda = 1e-8;
    hp.p = 3;
    const Predictor model = fit_predictor(d, hp, FitOptions::seeded(1));
    // Interpolating KRR on distinct inputs retrieves every training output.
    CHECK(evaluate_predictor(model, d, Metric::f1) == doctest::Approx(1.0));
    CHECK(evaluate_predictor(model, d, Metric::hamming) == 0.0);
    CHECK(evaluate_predictor(model, d, Metric::top1) == 1.0);
  }
}
