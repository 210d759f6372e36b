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

#include "oel/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "CLI11.hpp"
#include "oel/bench.hpp"
#include "oel/config.hpp"
#include "oel/dataio.hpp"
#include "oel/errors.hpp"
#include "oel/log.hpp"
#include "oel/metrics.hpp"
#include "oel/parallel.hpp"
#include "oel/pipeline.hpp"
#include "oel/tuning.hpp"

namespace oel::cli {
namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool iokr_only = false;
  bool share_krr = false;
  std::vector<std::string> sets;
  std::string model;
  std::string rankings;
};

const char* const kPathKeys[] = {"data.train_inputs", "data.train_outputs", "data.unsup_outputs",
                                 "data.test_inputs",  "data.test_outputs",  "data.candidates",
                                 "data.candidate_lists", "data.test_input_gram", "input_kernel.path",
                                 "output_kernel.path", "predict.model", "evaluate.rankings"};

// Config file < --set < dedicated flags.
Config resolve_config(const Flags& flags) {
  Config cfg;
  fs::path base = fs::current_path();
  if (!flags.config.empty()) {
    cfg = Config::load(flags.config);
    base = fs::absolute(flags.config).parent_path();
  }
  for (const auto& kv : flags.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (flags.seed) cfg.set("run.seed", std::to_string(*flags.seed));
  if (flags.threads) cfg.set("run.threads", std::to_string(*flags.threads));
  if (flags.iokr_only) cfg.set("model.iokr_only", "true");
  if (flags.share_krr) cfg.set("tune.share_krr", "true");
  if (!flags.model.empty()) cfg.set("predict.model", fs::absolute(flags.model).string());
  if (!flags.rankings.empty()) cfg.set("evaluate.rankings", fs::absolute(flags.rankings).string());
  // Snapshots must be runnable from anywhere.
  for (const char* key : kPathKeys)
    if (auto v = cfg.find(key); v && !v->empty() && fs::path(*v).is_relative())
      cfg.set(key, (base / *v).lexically_normal().string());
  return cfg;
}

std::uint64_t root_seed(Config& cfg) {
  const long long seed = cfg.get_int("run.seed", 0);
  if (seed < 0) throw UsageError("run.seed must be nonnegative");
  return static_cast<std::uint64_t>(seed);
}

int positive_int(Config& cfg, const std::string& key, long long fallback) {
  const long long v = cfg.get_int(key, fallback);
  if (v < 1 || v > std::numeric_limits<int>::max()) throw UsageError(key + " must be a positive integer");
  return static_cast<int>(v);
}

HyperParams params_from(Config& cfg, const Dataset& data) {
  HyperParams hp;
  hp.lambda = cfg.get_double("krr.lambda", 1e-3);
  hp.p = positive_int(cfg, "oel.p", 10);
  hp.c = cfg.get_double("oel.c", 1.0);
  hp.sigma2 = data.input_kernel.sigma2;
  hp.q = cfg.get_int("krr.nystrom_q", 0);
  if (!(hp.lambda > 0.0)) throw UsageError("krr.lambda must be positive");
  if (!(hp.c >= 0.0 && hp.c <= 1.0)) throw UsageError("oel.c must lie in [0, 1]");
  if (hp.q < 0) throw UsageError("krr.nystrom_q must be nonnegative");
  return hp;
}

FitOptions fit_options_from(Config& cfg) {
  const std::uint64_t root = root_seed(cfg);
  FitOptions opt = FitOptions::seeded(root);
  if (cfg.has("krr.seed")) opt.anchor_seed = static_cast<std::uint64_t>(cfg.get_int("krr.seed", 0));
  if (cfg.has("oel.seed")) opt.sketch_seed = static_cast<std::uint64_t>(cfg.get_int("oel.seed", 0));
  opt.iokr_only = cfg.get_bool("model.iokr_only", false);
  try {
    opt.eig = parse_eig_method(cfg.get_string("oel.method", "exact"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("oel.method: ") + e.what());
  }
  opt.oversample = positive_int(cfg, "oel.oversample", 10);
  opt.power_iters = static_cast<int>(cfg.get_int("oel.power_iters", 2));
  if (opt.power_iters < 0) throw UsageError("oel.power_iters must be nonnegative");
  return opt;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

std::vector<std::string> index_ids(Eigen::Index count) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) ids.push_back(std::to_string(i));
  return ids;
}

// ---------------------------------------------------------------------------

void cmd_fit(Config& cfg, const fs::path& out) {
  const Dataset data = load_dataset(cfg);
  const HyperParams hp = params_from(cfg, data);
  const FitOptions opt = fit_options_from(cfg);
  const Predictor model = fit_predictor(data, hp, opt);
  save_model(to_bundle(model), out / "model");
  std::cout << "fit: n=" << data.n() << " m=" << (model.oel ? data.m() : 0) << " lambda=" << hp.lambda;
  if (model.oel)
    std::cout << " c=" << hp.c << " p=" << model.oel->p() << " objective=" << fmt(model.oel->reconstruction_objective());
  else
    std::cout << " iokr";
  std::cout << "\nmodel written to " << (out / "model").string() << '\n';
}

Predictor load_predictor(const fs::path& dir, const Dataset& data) {
  Predictor model = from_bundle(load_model(dir));
  if (model.input_kernel.kind != data.input_kernel.kind || model.output_kernel.kind != data.output_kernel.kind)
    throw UsageError("the model's kernels differ from the configured kernels");
  if (model.input_kernel.kind == KernelKind::precomputed) model.input_kernel.source = data.input_kernel.source;
  if (model.output_kernel.kind == KernelKind::precomputed) model.output_kernel.source = data.output_kernel.source;
  return model;
}

void cmd_predict(Config& cfg, const fs::path& out) {
  const Dataset data = load_dataset(cfg);
  if (!data.has_test()) throw UsageError("predict needs data.test_inputs (or data.test_input_gram)");
  const fs::path model_dir = cfg.get_string("predict.model", fs::absolute(out / "model").string());
  const Predictor model = load_predictor(model_dir, data);
  const int k = positive_int(cfg, "predict.top_k", 10);
  const bool force_iokr = cfg.get_bool("model.iokr_only", false);
  const auto rankings = predict_rankings(model, data.test_inputs, candidate_blocks(model, data.candidates), k,
                                         data.query_candidates, force_iokr);
  const fs::path path = out / "rankings.tsv";
  std::ofstream file(path);
  if (!file) throw DataError("cannot write " + path.string());
  write_rankings(file, index_ids(data.n_test()), rankings, data.candidate_ids);
  std::cout << "predict: " << rankings.size() << " queries, " << data.candidates.rows() << " candidates, decoded "
            << (model.oel && !force_iokr ? "in the learned embedding" : "in the full output space") << "\nrankings written to "
            << path.string() << '\n';
}

void cmd_evaluate(Config& cfg, const fs::path& out) {
  const Dataset data = load_dataset(cfg);
  if (data.test_outputs.rows() == 0) throw UsageError("evaluate needs data.test_outputs");
  const fs::path path = cfg.get_string("evaluate.rankings", fs::absolute(out / "rankings.tsv").string());
  std::ifstream in(path);
  if (!in) throw DataError("cannot open rankings file " + path.string());
  const auto records = read_rankings(in, path.string());

  std::unordered_map<std::string, Eigen::Index> cand_row;
  for (std::size_t i = 0; i < data.candidate_ids.size(); ++i)
    cand_row.emplace(data.candidate_ids[i], static_cast<Eigen::Index>(i));
  const auto truth = find_rows(data.candidates, data.test_outputs);

  const KernelSpec& ky = data.output_kernel;
  std::vector<double> loss, f1, ham, tau;
  const std::vector<int> ks = {1, 5, 10};
  std::vector<std::vector<double>> hits(ks.size());
  std::size_t max_len = 0, absent = 0;
  for (const auto& rec : records) {
    Eigen::Index q = -1;
    auto [ptr, ec] = std::from_chars(rec.query_id.data(), rec.query_id.data() + rec.query_id.size(), q);
    if (ec != std::errc() || ptr != rec.query_id.data() + rec.query_id.size() || q < 0 || q >= data.test_outputs.rows())
      throw DataError(path.string() + ": query id '" + rec.query_id + "' does not name a test example");
    if (rec.candidate_ids.empty()) throw DataError(path.string() + ": query " + rec.query_id + " has no candidates");
    std::vector<Eigen::Index> rows;
    for (const auto& id : rec.candidate_ids) {
      const auto it = cand_row.find(id);
      if (it == cand_row.end()) throw DataError(path.string() + ": unknown candidate id '" + id + "'");
      rows.push_back(it->second);
    }
    max_len = std::max(max_len, rows.size());
    const Eigen::MatrixXd y = data.test_outputs.row(q);
    const Eigen::MatrixXd pred = data.candidates.row(rows.front());
    loss.push_back(rkhs_loss(self_norms(ky, y)(0), self_norms(ky, pred)(0), gram(ky, y, pred)(0, 0)));
    if (data.output_kind == OutputKind::bitset) {
      f1.push_back(f1_example(y.row(0).transpose(), pred.row(0).transpose()));
      ham.push_back(static_cast<double>(hamming(y.row(0).transpose(), pred.row(0).transpose())));
    }
    if (data.output_kind == OutputKind::permutation)
      tau.push_back(kendall_tau(permutation_from_kemeny(y.row(0).transpose()),
                                permutation_from_kemeny(pred.row(0).transpose())));
    const Eigen::Index t = truth[static_cast<std::size_t>(q)];
    if (t < 0) ++absent;
    const auto pos = std::find(rows.begin(), rows.end(), t) - rows.begin();
    for (std::size_t i = 0; i < ks.size(); ++i) hits[i].push_back(t >= 0 && pos < ks[i] ? 1.0 : 0.0);
  }
  if (records.empty()) throw DataError(path.string() + ": no rankings");

  std::vector<MetricReport> reports{summarize("rkhs_loss", loss)};
  if (!f1.empty()) reports.push_back(summarize("f1", f1));
  if (!ham.empty()) reports.push_back(summarize("hamming", ham));
  if (!tau.empty()) reports.push_back(summarize("kendall_tau", tau));
  if (absent == records.size()) {
    log_warning("no query's true output is among the candidates; top-k accuracy not reported");
  } else {
    if (absent > 0)
      log_warning(std::to_string(absent) + " queries have no true output among their candidates; counted as misses");
    for (std::size_t i = 0; i < ks.size(); ++i)
      if (static_cast<std::size_t>(ks[i]) <= max_len) reports.push_back(summarize("top" + std::to_string(ks[i]), hits[i]));
  }
  std::ofstream tsv(out / "metrics.tsv");
  write_report_tsv(tsv, reports);
  std::cout << format_report_table(reports);
}

SearchSpace space_from(Config& cfg, const Dataset& data) {
  const SearchSpace d = SearchSpace::defaults(data.n(), data.m(), data.input_kernel.sigma2);
  SearchSpace s;
  s.lambdas = cfg.get_double_list("tune.lambdas", d.lambdas);
  for (auto p : cfg.get_int_list("tune.ps", std::vector<long long>(d.ps.begin(), d.ps.end())))
    s.ps.push_back(static_cast<int>(p));
  s.cs = cfg.get_double_list("tune.cs", d.cs);
  s.sigma2s = cfg.get_double_list("tune.sigma2s", d.sigma2s);
  for (auto q : cfg.get_int_list("tune.qs", std::vector<long long>(d.qs.begin(), d.qs.end()))) s.qs.push_back(q);
  try {
    s.validate(data.n(), data.m());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return s;
}

void cmd_tune(Config& cfg, const fs::path& out) {
  const Dataset data = load_dataset(cfg);
  const SearchSpace space = space_from(cfg, data);
  TuneOptions opt;
  opt.metric = parse_metric(cfg.get_string("tune.metric", "surrogate"));
  opt.fit = fit_options_from(cfg);
  opt.share_krr = cfg.get_bool("tune.share_krr", false);
  const std::string protocol = cfg.get_string("tune.protocol", "ssv");
  const std::uint64_t seed = root_seed(cfg);

  std::ofstream table(out / "results.tsv");
  if (protocol == "ssv") {
    const int reps = positive_int(cfg, "tune.reps", 5);
    const double ratio = cfg.get_double("tune.ratio", 0.8);
    const SearchResult r = grid_search_ssv(data, space, reps, ratio, opt, seed);
    write_result_table(table, r.rows);
    const HyperParams& b = r.best_params;
    Config best;
    best.set("krr.lambda", fmt(b.lambda));
    best.set("krr.nystrom_q", std::to_string(b.q));
    if (!opt.fit.iokr_only) {
      best.set("oel.p", std::to_string(b.p));
      best.set("oel.c", fmt(b.c));
    }
    if (data.input_kernel.kind == KernelKind::gaussian || data.input_kernel.kind == KernelKind::gaussian_tanimoto)
      best.set("input_kernel.sigma2", fmt(b.sigma2));
    std::ofstream best_file(out / "best.conf");
    best.write(best_file);
    std::size_t failed = std::count(r.failed.begin(), r.failed.end(), true);
    const auto& rep = r.reports[r.best];
    std::cout << "tune: " << r.points.size() << " grid points x " << reps << " splits, " << failed << " failed\n"
              << "best: lambda=" << b.lambda << " p=" << b.p << " c=" << b.c << " sigma2=" << b.sigma2 << " q=" << b.q
              << "  " << to_string(opt.metric) << '=' << fmt(r.best_score);
    if (rep.standard_error) std::cout << " +- " << fmt(*rep.standard_error);
    std::cout << '\n';
  } else if (protocol == "nested") {
    const int outer = positive_int(cfg, "tune.outer", 5);
    const int inner = positive_int(cfg, "tune.inner", 4);
    const NestedResult r = nested_cv(data, space, outer, inner, opt, seed);
    write_result_table(table, r.rows);
    std::cout << "tune: nested " << outer << "x" << inner << " folds\n";
    for (std::size_t f = 0; f < r.selected.size(); ++f) {
      const auto& s = r.selected[f];
      std::cout << "  fold " << f << ": lambda=" << s.lambda << " p=" << s.p << " c=" << s.c << " sigma2=" << s.sigma2
                << " q=" << s.q << "  " << to_string(opt.metric) << '=' << fmt(r.outer_scores[f]) << '\n';
    }
    std::cout << "outer " << to_string(opt.metric) << '=' << fmt(r.outer.mean);
    if (r.outer.standard_error) std::cout << " +- " << fmt(*r.outer.standard_error);
    std::cout << '\n';
  } else {
    throw UsageError("tune.protocol must be 'ssv' or 'nested', got '" + protocol + "'");
  }
}

void cmd_bench(Config& cfg, const fs::path& out) {
  DecodeWorkload w;
  w.n = positive_int(cfg, "bench.n", 2000);
  w.p = positive_int(cfg, "bench.p", 100);
  w.queries = positive_int(cfg, "bench.queries", 256);
  w.k = positive_int(cfg, "bench.k", 10);
  w.repeats = positive_int(cfg, "bench.repeats", 3);
  w.seed = root_seed(cfg);
  const auto sizes = cfg.get_int_list("bench.candidates", {1000, 10000, 100000});
  std::ofstream tsv(out / "bench.tsv");
  tsv << "candidates\tn\tp\tiokr_ms_per_query\toel_ms_per_query\tspeedup\n";
  std::cout << "bench-decode: n=" << w.n << " p=" << w.p << " queries=" << w.queries << " k=" << w.k << '\n';
  for (long long size : sizes) {
    if (size < 1) throw UsageError("bench.candidates entries must be positive");
    w.candidates = size;
    const double iokr = time_decode_iokr(w);
    const double oel = time_decode_oel(w);
    tsv << size << '\t' << w.n << '\t' << w.p << '\t' << iokr << '\t' << oel << '\t' << iokr / oel << '\n';
    std::cout << "  N=" << size << "  iokr " << fmt(iokr) << " ms/query  oel " << fmt(oel) << " ms/query  speedup "
              << fmt(iokr / oel) << "x\n";
  }
}

void cmd_synth(Config& cfg, const fs::path& out) {
  const long long n = cfg.get_int("synth.n", 2000);
  const long long m = cfg.get_int("synth.m", 2000);
  const long long t = cfg.get_int("synth.n_test", 500);
  const double var_x = cfg.get_double("synth.var_x", 1.0);
  const double var_z = cfg.get_double("synth.var_z", 4.0);
  Dataset data;
  try {
    data = synth_misleading_axis(n, m, t, var_x, var_z, root_seed(cfg));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  write_dataset(data, out);
  std::cout << "synth: n=" << n << " m=" << m << " test=" << t << "\ndataset written to " << out.string()
            << " (config: " << (out / "data.conf").string() << ")\n";
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e)) return kUsage;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) return kData;
  return kNumerical;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Structured prediction by output kernel regression with a learned output embedding.", "oel"};
  app.fallthrough();
  app.require_subcommand(1, 1);
  Flags flags;
  app.add_option("--config", flags.config, "key = value configuration file");
  app.add_option("--out", flags.out, "output directory")->capture_default_str();
  app.add_option("--seed", flags.seed, "root random seed (run.seed)");
  app.add_option("--threads", flags.threads, "worker thread cap (run.threads)")->check(CLI::PositiveNumber);
  app.add_flag("--iokr-only", flags.iokr_only, "skip the embedding and decode in the full output space");
  app.add_flag("--share-krr", flags.share_krr, "tune: reuse KRR fits across p and c");
  app.add_option("--set", flags.sets, "override a config key, key=value; repeatable")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--model", flags.model, "predict: model directory (predict.model, default OUT/model)");
  app.add_option("--rankings", flags.rankings, "evaluate: rankings file (evaluate.rankings, default OUT/rankings.tsv)");
  app.add_subcommand("fit", "train KRR and the output embedding, write a model bundle");
  app.add_subcommand("predict", "decode the test inputs against the candidate set");
  app.add_subcommand("evaluate", "score a rankings file against the test outputs");
  app.add_subcommand("tune", "grid search with repeated subsampling or nested cross-validation");
  app.add_subcommand("bench-decode", "time IOKR and OEL decoding on random blocks");
  app.add_subcommand("synth", "write a synthetic dataset with a misleading principal axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const fs::path out = flags.out;

  std::ofstream detail;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (!ec) detail.open(out / "oel.log");
  set_log_sink([&detail](LogLevel level, std::string_view message) {
    const char* prefix = level == LogLevel::warning ? "warning: " : "";
    std::clog << prefix << message << '\n';
    if (detail) detail << prefix << message << '\n';
  });
  struct RestoreSink {
    ~RestoreSink() {
      set_log_sink([](LogLevel level, std::string_view message) {
        std::clog << (level == LogLevel::warning ? "warning: " : "") << message << '\n';
      });
    }
  } restore;

  Config cfg;
  int code = kOk;
  try {
    if (ec) throw DataError("cannot create output directory " + out.string() + ": " + ec.message());
    cfg = resolve_config(flags);
    cfg.set("run.command", command);
    const long long threads = cfg.get_int("run.threads", std::max(1u, std::thread::hardware_concurrency()));
    if (threads < 1) throw UsageError("run.threads must be positive");
    set_max_threads(static_cast<int>(threads));

    if (command == "fit") cmd_fit(cfg, out);
    else if (command == "predict") cmd_predict(cfg, out);
    else if (command == "evaluate") cmd_evaluate(cfg, out);
    else if (command == "tune") cmd_tune(cfg, out);
    else if (command == "bench-decode") cmd_bench(cfg, out);
    else if (command == "synth") cmd_synth(cfg, out);
  } catch (const std::exception& e) {
    code = exit_code_for(e);
    std::cerr << "oel " << command << ": error: " << e.what() << '\n';
    if (detail) {
      detail << "error (exit " << code << "): " << e.what() << "\nconfiguration at failure:\n";
      cfg.write(detail);
    }
  }
  if (!ec) {
    std::ofstream snapshot(out / "resolved.conf");
    snapshot << "# resolved configuration of `oel " << command << "`; rerun with --config on this file\n";
    cfg.write(snapshot);
  }
  return code;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"oel"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace oel::cli
