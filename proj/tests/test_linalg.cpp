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

#include <cmath>

#include "doctest.h"
#include "oel/errors.hpp"
#include "oel/linalg.hpp"
#include "oracles.hpp"

using namespace oel;
using namespace oel::testing;

namespace {

double rel_err(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  return (got - want).norm() / std::max(1e-300, want.norm());
}

double orthonormality_defect(const Eigen::MatrixXd& u) {
  return (u.transpose() * u - Eigen::MatrixXd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("regularized solve examples") {
    CHECK(solve_regularized(Eigen::MatrixXd::Constant(1, 1, 1.0), 1.0).solve(Eigen::MatrixXd::Ones(1, 1))(0, 0) ==
          doctest::Approx(0.5).epsilon(1e-15));
    const Eigen::MatrixXd half = solve_regularized(Eigen::MatrixXd::Zero(2, 2), 2.0).solve(Eigen::MatrixXd::Identity(2, 2));
    CHECK(rel_err(half, 0.5 * Eigen::MatrixXd::Identity(2, 2)) <= 1e-15);
    Eigen::MatrixXd k(2, 2);
    k << 2, 1, 1, 2;
    const Eigen::MatrixXd x = solve_regularized(k, 1.0).solve(Eigen::Vector2d(1, 1));
    CHECK(x(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(x(1, 0) == doctest::Approx(0.25).epsilon(1e-14));
  }

  TEST_CASE("solve composed with (K + aI) is the identity") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::Index n = 5 + trial * 7;
      const Eigen::MatrixXd k = random_psd(n, n / 2 + 1, rng);
      const double a = std::pow(10.0, -trial % 4);
      const auto solver = solve_regularized(k, a);
      const Eigen::MatrixXd v = random_matrix(n, 3, rng);
      const Eigen::MatrixXd kv = (k + a * Eigen::MatrixXd::Identity(n, n)) * v;
      CHECK(rel_err(solver.solve(kv), v) <= 1e-8);
    }
  }

  TEST_CASE("solver preconditions") {
    Eigen::MatrixXd skew(2, 2);
    skew << 1, 0.5, 0.1, 1;
    CHECK_THROWS_AS(solve_regularized(skew, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(solve_regularized(Eigen::MatrixXd::Identity(2, 2), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(solve_regularized(Eigen::MatrixXd::Identity(2, 3), 1.0), std::invalid_argument);
  }

  TEST_CASE("indefinite input reports the pivot") {
    Eigen::MatrixXd k = Eigen::MatrixXd::Identity(3, 3);
    k(2, 2) = -5.0;
    try {
      (void)solve_regularized(k, 1.0);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("pivot") != std::string::npos);
    }
  }

  TEST_CASE("exact eigen examples") {
    const EigPair d = eig_topk_exact(Eigen::Vector2d(3, 1).asDiagonal().toDenseMatrix(), 1);
    CHECK(d.values(0) == doctest::Approx(3.0));
    CHECK(std::abs(d.vectors(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(d.vectors(1, 0)) <= 1e-15);

    const EigPair id = eig_topk_exact(Eigen::MatrixXd::Identity(3, 3), 2);
    CHECK(id.values(0) == doctest::Approx(1.0));
    CHECK(id.values(1) == doctest::Approx(1.0));
    CHECK(orthonormality_defect(id.vectors) <= 1e-12);

    Eigen::MatrixXd k(2, 2);
    k << 2, 1, 1, 2;
    const EigPair e = eig_topk_exact(k, 2);
    CHECK(e.values(0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(e.values(1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(e.vectors(0, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(e.vectors(0, 0) * e.vectors(1, 0) > 0.0);
  }

  TEST_CASE("eigen range and PSD checks") {
    CHECK_THROWS_AS(eig_topk_exact(Eigen::MatrixXd::Identity(3, 3), 4), std::invalid_argument);
    CHECK_THROWS_AS(eig_topk_exact(Eigen::MatrixXd::Identity(3, 3), 0), std::invalid_argument);
    Eigen::MatrixXd neg = Eigen::MatrixXd::Identity(3, 3);
    neg(2, 2) = -1e-3;
    CHECK_THROWS_AS(eig_topk_exact(neg, 1), NumericalError);
    Eigen::MatrixXd tiny = Eigen::MatrixXd::Identity(3, 3);
    tiny(2, 2) = -1e-12;
    const EigPair e = eig_topk_exact(tiny, 3);
    CHECK(e.values(2) == 0.0);
  }

  TEST_CASE("eigenpairs are sorted, orthonormal and sign-fixed") {
    std::mt19937_64 rng(4);
    const Eigen::MatrixXd k = random_psd(20, 8, rng);
    const EigPair e = eig_topk_exact(k, 8);
    for (int l = 1; l < 8; ++l) CHECK(e.values(l - 1) >= e.values(l));
    CHECK((e.values.array() >= 0.0).all());
    CHECK(orthonormality_defect(e.vectors) <= 1e-8);
    for (int l = 0; l < 8; ++l) {
      Eigen::Index at = 0;
      e.vectors.col(l).cwiseAbs().maxCoeff(&at);
      CHECK(e.vectors(at, l) > 0.0);
    }
  }

  TEST_CASE("truncation error equals the tail of the spectrum") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::Index n = 10 + 5 * trial;
      const Eigen::MatrixXd k = random_psd(n, n, rng);
      const Eigen::VectorXd all = spectrum_desc(k);
      for (int p = 1; p <= n; ++p) {
        const EigPair e = eig_topk_exact(k, p);
        const double err = (k - e.vectors * e.values.asDiagonal() * e.vectors.transpose()).norm();
        const double tail = std::sqrt(all.tail(n - p).squaredNorm());
        CHECK(std::abs(err - tail) <= 1e-8 * std::max(1.0, all(0)));
      }
    }
  }

  TEST_CASE("randomized eigen examples") {
    const Eigen::MatrixXd k = Eigen::Vector3d(4, 1, 0.01).asDiagonal().toDenseMatrix();
    const EigPair e = eig_topk_randomized(k, 2, SketchOptions{1, 2, 9});
    CHECK(std::abs(e.values(0) - 4.0) <= 1e-6);
    CHECK(std::abs(e.values(1) - 1.0) <= 1e-6);

    std::mt19937_64 rng(8);
    const Eigen::MatrixXd psd = random_psd(15, 15, rng);
    const EigPair full = eig_topk_randomized(psd, 15, SketchOptions{0, 0, 3});
    const EigPair exact = eig_topk_exact(psd, 15);
    CHECK((full.values - exact.values).cwiseAbs().maxCoeff() <= 1e-8 * exact.values(0));

    const EigPair a = eig_topk_randomized(psd, 4, SketchOptions{5, 2, 77});
    const EigPair b = eig_topk_randomized(psd, 4, SketchOptions{5, 2, 77});
    CHECK(a.values == b.values);
    CHECK(a.vectors == b.vectors);
  }

  TEST_CASE("randomized sketch width is checked") {
    CHECK_THROWS_AS(eig_topk_randomized(Eigen::MatrixXd::Identity(5, 5), 3, SketchOptions{3, 2, 0}),
                    std::invalid_argument);
  }

  TEST_CASE("randomized eigenvalues match exact across a large spectral gap") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 10; ++trial) {
      const int p = 1 + trial % 5;
      Eigen::VectorXd spec(80);
      for (Eigen::Index j = 0; j < 80; ++j) spec(j) = j < p ? 1.0 + 0.5 * static_cast<double>(p - j) : 0.1 * std::pow(0.9, j);
      const Eigen::MatrixXd k = with_spectrum(spec, rng);
      const Eigen::VectorXd want = spectrum_desc(k).head(p);
      CHECK(spectrum_desc(k)(p) / want(p - 1) <= 0.1);
      const EigPair e = eig_topk_randomized(k, p, SketchOptions{10, 2, static_cast<std::uint64_t>(trial)});
      for (int l = 0; l < p; ++l) CHECK(std::abs(e.values(l) - want(l)) <= 1e-6 * want(l));
    }
  }
}
