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

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oel/cli.hpp"
#include "oel/config.hpp"
#include "oel/dataio.hpp"
#include "oel/decode.hpp"
#include "oracles.hpp"

using namespace oel;
using namespace oel::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::vector<RankingRecord> rankings_in(const fs::path& path) {
  std::ifstream in(path);
  return read_rankings(in, path.string());
}

// Metric name -> mean from metrics.tsv.
std::map<std::string, double> metrics_in(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::map<std::string, double> out;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string name, mean;
    std::getline(fields, name, '\t');
    std::getline(fields, mean, '\t');
    out[name] = std::stod(mean);
  }
  return out;
}

int oel_run(std::vector<std::string> args) { return cli::run(args); }

// A small synthetic dataset written by the synth command.
fs::path make_synth(const fs::path& root) {
  const fs::path data = root / "data";
  REQUIRE(oel_run({"synth", "--out", data.string(), "--seed", "3", "--set", "synth.n=40", "--set", "synth.m=20",
                   "--set", "synth.n_test=10"}) == cli::kOk);
  return data / "data.conf";
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("full-rank embedding predicts the same rankings as IOKR") {
    TempDir dir("cli_fullrank");
    const fs::path conf = make_synth(dir.path);
    const fs::path a = dir.path / "oel", b = dir.path / "iokr";
    const std::vector<std::string> common = {"--config", conf.string(), "--set", "krr.lambda=0.01",
                                             "--set",    "oel.p=2",     "--set", "oel.c=0.5"};
    auto with = [&](std::vector<std::string> head, const fs::path& out, bool iokr) {
      head.insert(head.end(), common.begin(), common.end());
      head.push_back("--out");
      head.push_back(out.string());
      if (iokr) head.push_back("--iokr-only");
      return head;
    };
    REQUIRE(oel_run(with({"fit"}, a, false)) == cli::kOk);
    REQUIRE(oel_run(with({"predict"}, a, false)) == cli::kOk);
    REQUIRE(oel_run(with({"fit"}, b, true)) == cli::kOk);
    REQUIRE(oel_run(with({"predict"}, b, true)) == cli::kOk);
    const auto ra = rankings_in(a / "rankings.tsv");
    const auto rb = rankings_in(b / "rankings.tsv");
    REQUIRE(ra.size() == 10);
    REQUIRE(rb.size() == 10);
    for (std::size_t q = 0; q < ra.size(); ++q) {
      CHECK(ra[q].candidate_ids == rb[q].candidate_ids);
      for (std::size_t i = 0; i < ra[q].scores.size(); ++i)
        CHECK(ra[q].scores[i] == doctest::Approx(rb[q].scores[i]).epsilon(1e-5));
    }
  }

  TEST_CASE("evaluating the truth scores perfectly") {
    TempDir dir("cli_truth");
    const fs::path conf = make_synth(dir.path);
    // Test outputs are the last 10 candidates.
    std::ostringstream r;
    for (int q = 0; q < 10; ++q) r << q << '\t' << (60 + q) << ":0\t0:1\n";
    write_text(dir.path / "truth.tsv", r.str());
    const fs::path out = dir.path / "eval";
    REQUIRE(oel_run({"evaluate", "--config", conf.string(), "--rankings", (dir.path / "truth.tsv").string(), "--out",
                     out.string()}) == cli::kOk);
    const auto m = metrics_in(out / "metrics.tsv");
    CHECK(m.at("rkhs_loss") == 0.0);
    CHECK(m.at("top1") == 1.0);
    CHECK(m.count("top5") == 0);
  }

  TEST_CASE("bitset truth gives F1 one") {
    TempDir dir("cli_f1");
    write_text(dir.path / "x.csv", "#3,1\n0\n1\n2\n");
    write_text(dir.path / "y.txt", "#dim 4\n0 1\n2\n\n");
    write_text(dir.path / "xt.csv", "#2,1\n0.1\n1.9\n");
    write_text(dir.path / "yt.txt", "#dim 4\n0 1\n\n");
    write_text(dir.path / "data.conf",
               "data.output_kind = bitset\ninput_kernel.kind = gaussian\ndata.train_inputs = x.csv\n"
               "data.train_outputs = y.txt\ndata.test_inputs = xt.csv\ndata.test_outputs = yt.txt\n");
    write_text(dir.path / "truth.tsv", "0\t0:0\t1:1\n1\t2:0\t0:1\n");
    const fs::path out = dir.path / "eval";
    REQUIRE(oel_run({"evaluate", "--config", (dir.path / "data.conf").string(), "--rankings",
                     (dir.path / "truth.tsv").string(), "--out", out.string()}) == cli::kOk);
    const auto m = metrics_in(out / "metrics.tsv");
    CHECK(m.at("f1") == 1.0);
    CHECK(m.at("hamming") == 0.0);
    CHECK(m.at("rkhs_loss") == 0.0);
  }

  TEST_CASE("exit codes") {
    TempDir dir("cli_codes");
    const fs::path out = (dir.path / "out");
    CHECK(oel_run({}) == cli::kUsage);
    CHECK(oel_run({"fit", "--bogus"}) == cli::kUsage);
    CHECK(oel_run({"fit", "--out", out.string(), "--set", "novalue"}) == cli::kUsage);
    CHECK(oel_run({"fit", "--out", out.string(), "--config", (dir.path / "missing.conf").string()}) == cli::kUsage);
    CHECK(oel_run({"fit", "--out", out.string(), "--set", "data.train_inputs=nowhere.csv", "--set",
                   "data.train_outputs=nowhere.csv"}) == cli::kData);

    const fs::path conf = make_synth(dir.path);
    CHECK(oel_run({"fit", "--out", out.string(), "--config", conf.string(), "--set", "krr.lambda=-1"}) == cli::kUsage);
    CHECK(oel_run({"tune", "--out", out.string(), "--config", conf.string(), "--set", "tune.protocol=loo"}) ==
          cli::kUsage);

    // c = 0 on all-zero unsupervised outputs leaves nothing to embed.
    write_text(dir.path / "data" / "unsup_outputs.csv", "#3,2\n0,0\n0,0\n0,0\n");
    CHECK(oel_run({"fit", "--out", out.string(), "--config", conf.string(), "--set", "oel.c=0", "--set", "oel.p=1"}) ==
          cli::kNumerical);
    CHECK(slurp(out / "oel.log").find("error (exit 3)") != std::string::npos);
  }

  TEST_CASE("identical runs give identical bytes and resolved configs rerun") {
    TempDir dir("cli_determinism");
    const fs::path conf = make_synth(dir.path);
    std::vector<std::string> paths;
    for (const char* name : {"a", "b"}) {
      const fs::path out = dir.path / name;
      REQUIRE(oel_run({"fit", "--config", conf.string(), "--out", out.string(), "--seed", "5", "--threads", "2", "--set",
                       "oel.p=1", "--set", "oel.c=0.5"}) == cli::kOk);
      REQUIRE(oel_run({"predict", "--config", conf.string(), "--out", out.string(), "--seed", "5"}) == cli::kOk);
      paths.push_back(out.string());
    }
    CHECK(slurp(fs::path(paths[0]) / "rankings.tsv") == slurp(fs::path(paths[1]) / "rankings.tsv"));
    CHECK(slurp(fs::path(paths[0]) / "model" / "oel.beta.bin") == slurp(fs::path(paths[1]) / "model" / "oel.beta.bin"));

    // Rerunning from the snapshot in another directory reproduces the result.
    const fs::path snapshot = fs::path(paths[0]) / "resolved.conf";
    const Config resolved = Config::load(snapshot.string());
    CHECK(resolved.require("run.command") == "predict");
    CHECK(resolved.require("predict.top_k") == "10");
    const fs::path rerun = dir.path / "rerun";
    REQUIRE(oel_run({"predict", "--config", snapshot.string(), "--out", rerun.string()}) == cli::kOk);
    CHECK(slurp(rerun / "rankings.tsv") == slurp(fs::path(paths[0]) / "rankings.tsv"));
  }

  TEST_CASE("tune writes the result table and best configuration") {
    TempDir dir("cli_tune");
    const fs::path conf = make_synth(dir.path);
    const fs::path out = dir.path / "tune";
    REQUIRE(oel_run({"tune", "--config", conf.string(), "--out", out.string(), "--share-krr", "--set",
                     "tune.lambdas=0.1,0.001", "--set", "tune.ps=1,2", "--set", "tune.cs=0,1", "--set",
                     "tune.reps=2"}) == cli::kOk);
    std::ifstream table(out / "results.tsv");
    std::size_t lines = 0;
    for (std::string line; std::getline(table, line);) ++lines;
    CHECK(lines == 1 + 8 * 2);
    const Config best = Config::load((out / "best.conf").string());
    CHECK(best.has("krr.lambda"));
    CHECK(best.has("oel.c"));

    const fs::path nested = dir.path / "nested";
    REQUIRE(oel_run({"tune", "--config", conf.string(), "--out", nested.string(), "--set", "tune.protocol=nested",
                     "--set", "tune.lambdas=0.01", "--set", "tune.ps=1", "--set", "tune.cs=1", "--set",
                     "tune.outer=3", "--set", "tune.inner=2"}) == cli::kOk);
    CHECK(slurp(nested / "results.tsv").find("\touter\n") != std::string::npos);
  }

  TEST_CASE("bench-decode writes one row per candidate count") {
    TempDir dir("cli_bench");
    const fs::path out = dir.path / "bench";
    REQUIRE(oel_run({"bench-decode", "--out", out.string(), "--set", "bench.n=40", "--set", "bench.p=4", "--set",
                     "bench.queries=3", "--set", "bench.repeats=1", "--set", "bench.candidates=100,200"}) == cli::kOk);
    std::ifstream tsv(out / "bench.tsv");
    std::size_t lines = 0;
    for (std::string line; std::getline(tsv, line);) ++lines;
    CHECK(lines == 3);
  }
}
