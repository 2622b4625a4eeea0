// Copyright 2026 The CPatchBLS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "cpatchbls/commands.hpp"

namespace {

using namespace cpatchbls;

template <typename T>
void set_if(std::optional<T>& dst, const CLI::Option* opt, const T& value) {
  if (opt->count() > 0) dst = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patch-based broad learning system for multivariate time-series anomaly detection"};
  app.require_subcommand(1);

  // detect
  DetectOptions detect;
  std::string detect_config, detect_mode, detect_timing, detect_dump;
  unsigned detect_threads = 0;
  std::uint64_t detect_seed = 0;
  auto* d = app.add_subcommand("detect", "fit on train, score test, write per-timestep scores");
  auto* d_cfg = d->add_option("--config", detect_config, "key=value config file (defaults if omitted)");
  d->add_option("--train", detect.train, "training CSV")->required();
  d->add_option("--test", detect.test, "test CSV")->required();
  d->add_option("--out", detect.out, "scores CSV to write")->required();
  auto* d_mode = d->add_option("--mode", detect_mode, "SE or PE (overrides config)")->check(CLI::IsMember({"SE", "PE"}));
  auto* d_threads = d->add_option("--threads", detect_threads, "worker threads for PE");
  auto* d_seed = d->add_option("--seed", detect_seed, "master seed (overrides config)");
  auto* d_timing = d->add_option("--timing-out", detect_timing, "timing JSON path (default <out>.timing.json)");
  auto* d_dump = d->add_option("--dump-models", detect_dump, "directory for binary model dumps");

  // eval
  EvalOptions eval;
  std::string eval_mode = "sweep", eval_out;
  auto* e = app.add_subcommand("eval", "score a detection run against labels");
  e->add_option("--scores", eval.scores, "scores CSV")->required();
  e->add_option("--labels", eval.labels, "labels CSV")->required();
  e->add_option("--anomaly-ratio", eval.anomaly_ratio, "ratio used by the quantile threshold");
  e->add_option("--pa-mode", eval_mode, "headline PA-F1 rule: ratio or sweep")->check(CLI::IsMember({"ratio", "sweep"}));
  auto* e_out = e->add_option("--out", eval_out, "metrics JSON path (default <scores>.metrics.json)");

  // bench
  BenchOptions bench;
  std::string bench_config, bench_out;
  unsigned bench_threads = 0;
  std::uint64_t bench_seed = 0;
  auto* b = app.add_subcommand("bench", "time SE and PE execution and check they agree");
  auto* b_cfg = b->add_option("--config", bench_config, "key=value config file");
  b->add_option("--train", bench.train, "training CSV")->required();
  b->add_option("--test", bench.test, "test CSV")->required();
  b->add_option("--trials", bench.trials, "number of SE/PE trial pairs");
  auto* b_threads = b->add_option("--threads", bench_threads, "worker threads for PE");
  auto* b_seed = b->add_option("--seed", bench_seed, "master seed (overrides config)");
  auto* b_out = b->add_option("--out", bench_out, "bench report JSON");
  b->add_flag("--inject-seed-fault", bench.inject_seed_fault, "perturb PE seed derivation (self-test)")
      ->group("");

  // synth
  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "generate a labeled synthetic benchmark");
  s->add_option("--out", synth.out_dir, "output directory")->required();
  s->add_option("--seed", synth.spec.seed, "generator seed");
  s->add_option("--n-train", synth.spec.n_train, "training length");
  s->add_option("--n-test", synth.spec.n_test, "test length");
  s->add_option("--channels", synth.spec.channels, "number of channels");
  s->add_option("--anomaly-ratio", synth.spec.anomaly_ratio, "target labeled fraction of the test split");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << "error: InvalidArguments: cli: " << ex.what() << '\n';
    return kExitInput;
  }

  if (d->parsed()) {
    set_if(detect.config, d_cfg, fs::path(detect_config));
    if (d_mode->count()) detect.mode = parse_exec_mode(detect_mode);
    set_if(detect.threads, d_threads, detect_threads);
    set_if(detect.seed, d_seed, detect_seed);
    set_if(detect.timing_out, d_timing, fs::path(detect_timing));
    set_if(detect.dump_models, d_dump, fs::path(detect_dump));
    return cmd_detect(detect);
  }
  if (e->parsed()) {
    eval.mode = eval_mode == "ratio" ? ThresholdMode::RatioThreshold : ThresholdMode::BestF1Sweep;
    set_if(eval.out, e_out, fs::path(eval_out));
    return cmd_eval(eval);
  }
  if (b->parsed()) {
    set_if(bench.config, b_cfg, fs::path(bench_config));
    set_if(bench.threads, b_threads, bench_threads);
    set_if(bench.seed, b_seed, bench_seed);
    set_if(bench.out, b_out, fs::path(bench_out));
    return cmd_bench(bench);
  }
  return cmd_synth(synth);
}
