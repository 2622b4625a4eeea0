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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cpatchbls/commands.hpp"

namespace cpatchbls {
namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  auto text = slurp(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

/// Runs the CLI binary; returns its exit status and captured stderr.
std::pair<int, std::string> run_cli(const std::string& args, const fs::path& dir) {
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string(CPATCHBLS_CLI_PATH) + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status), slurp(err)};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cpatchbls_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "small.cfg") << "patch_sizes = [8, 16]\nd_ft = 8\nd_enh = 8\nd_k = 16\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  void synth_small(const fs::path& out, std::uint64_t seed = 7) {
    SynthOptions opt;
    opt.spec.n_train = 800;
    opt.spec.n_test = 400;
    opt.spec.channels = 2;
    opt.spec.seed = seed;
    opt.out_dir = out;
    std::ostringstream sink;
    ASSERT_EQ(cmd_synth(opt, sink, sink), 0) << sink.str();
  }

  DetectOptions detect_opts(const fs::path& data, const fs::path& out) {
    DetectOptions d;
    d.config = dir_ / "small.cfg";
    d.train = data / "train.csv";
    d.test = data / "test.csv";
    d.out = out;
    return d;
  }

  fs::path dir_;
  std::ostringstream sink_;
};

TEST_F(CliTest, SynthDefaultSpec) {
  SynthOptions opt;
  opt.out_dir = dir_ / "syn";
  ASSERT_EQ(cmd_synth(opt, sink_, sink_), 0);
  const auto labels = load_labels(opt.out_dir / "labels.csv");
  ASSERT_EQ(labels.size(), static_cast<std::size_t>(opt.spec.n_test));
  const double ratio = static_cast<double>(std::count(labels.begin(), labels.end(), 1)) / labels.size();
  EXPECT_GE(ratio, 0.03);
  EXPECT_LE(ratio, 0.07);
  auto train = load_csv(opt.out_dir / "train.csv", true);
  EXPECT_EQ(train.values.rows(), opt.spec.n_train);
  EXPECT_EQ(train.header.size(), static_cast<std::size_t>(opt.spec.channels));

  SynthOptions again = opt;
  again.out_dir = dir_ / "syn2";
  ASSERT_EQ(cmd_synth(again, sink_, sink_), 0);
  for (auto f : {"train.csv", "test.csv", "labels.csv"})
    EXPECT_EQ(slurp(opt.out_dir / f), slurp(again.out_dir / f)) << f;
}

TEST_F(CliTest, SynthLabelsMatchInjectedEvents) {
  SynthSpec spec;
  auto data = make_synthetic(spec);
  std::vector<int> from_events(static_cast<std::size_t>(spec.n_test), 0);
  for (const auto& ev : data.events) {
    EXPECT_FALSE(ev.channels.empty());
    for (int t = ev.start; t < ev.start + ev.length; ++t) from_events[static_cast<std::size_t>(t)] = 1;
  }
  EXPECT_EQ(from_events, data.labels);

  // Training data has no injected offsets: the clean signal stays within
  // sin + 0.5 sin + noise bounds.
  EXPECT_LE(data.train.cwiseAbs().maxCoeff(), 1.5 + 0.05 * 6);
  EXPECT_GT(data.test.cwiseAbs().maxCoeff(), 2.0);
}

TEST_F(CliTest, DetectWritesScoresAndTiming) {
  synth_small(dir_ / "syn");
  auto d = detect_opts(dir_ / "syn", dir_ / "scores.csv");
  ASSERT_EQ(cmd_detect(d, sink_, sink_), 0) << sink_.str();
  EXPECT_EQ(line_count(d.out), 400u);
  auto timing = json::parse(slurp(dir_ / "scores.timing.json"));
  for (auto key : {"scales", "se_total", "pe_total", "wall_clock"}) EXPECT_TRUE(timing.contains(key)) << key;
  EXPECT_TRUE(timing["scales"].contains("8"));
  EXPECT_TRUE(timing["scales"]["16"].contains("fit_seconds"));
  EXPECT_TRUE(timing["scales"]["16"].contains("score_seconds"));

  auto d2 = detect_opts(dir_ / "syn", dir_ / "scores2.csv");
  d2.mode = ExecMode::PE;
  d2.threads = 3;
  ASSERT_EQ(cmd_detect(d2, sink_, sink_), 0);
  EXPECT_EQ(slurp(d.out), slurp(d2.out));
}

TEST_F(CliTest, DetectDumpsLoadableModels) {
  synth_small(dir_ / "syn");
  auto d = detect_opts(dir_ / "syn", dir_ / "scores.csv");
  d.dump_models = dir_ / "models";
  ASSERT_EQ(cmd_detect(d, sink_, sink_), 0) << sink_.str();
  auto model = load_model(dir_ / "models" / "s0_p8_c1_skp.pbls");
  EXPECT_EQ(model.branch, BranchKind::SKP);
  EXPECT_EQ(model.patch_size, 8);

  auto data = load_normalized_dataset(d.train, d.test);
  RunConfig cfg = parse_config(*d.config);
  auto refit = fit_patchbls(patchify(split_channels(data.train_values)[1], 8), cfg, BranchKind::SKP,
                            mix64(cfg.master_seed, 0, BranchKind::SKP, 1));
  auto grid = patchify(split_channels(data.test_values)[1], 8);
  EXPECT_EQ(reconstruct(model, grid), reconstruct(refit, grid));
}

TEST_F(CliTest, EvalReportsAllKeys) {
  synth_small(dir_ / "syn");
  const auto labels = load_labels(dir_ / "syn" / "labels.csv");
  Series perfect(labels.begin(), labels.end());
  write_series(dir_ / "perfect.csv", perfect);
  EvalOptions e;
  e.scores = dir_ / "perfect.csv";
  e.labels = dir_ / "syn" / "labels.csv";
  e.out = dir_ / "m.json";
  ASSERT_EQ(cmd_eval(e, sink_, sink_), 0);
  auto m = json::parse(slurp(dir_ / "m.json"));
  for (auto key : {"roc_auc", "pr_auc", "pa_f1", "pa_precision", "pa_recall", "threshold_delta", "mode",
                   "ratio_threshold", "best_f1_sweep"})
    EXPECT_TRUE(m.contains(key)) << key;
  EXPECT_DOUBLE_EQ(m["roc_auc"].get<double>(), 1.0);
  EXPECT_EQ(m["mode"], "best_f1_sweep");
}

TEST_F(CliTest, EvalReproducesHandTrace) {
  write_series(dir_ / "s.csv", Series{0, 0, 9, 0, 9});
  std::ofstream(dir_ / "l.csv") << "0\n1\n1\n0\n0\n";
  EvalOptions e;
  e.scores = dir_ / "s.csv";
  e.labels = dir_ / "l.csv";
  e.anomaly_ratio = 0.4;
  e.mode = ThresholdMode::RatioThreshold;
  ASSERT_EQ(cmd_eval(e, sink_, sink_), 0);
  auto m = json::parse(slurp(dir_ / "s.metrics.json"));
  EXPECT_NEAR(m["pa_f1"].get<double>(), 0.8, 1e-12);
  EXPECT_NEAR(m["ratio_threshold"]["pa_precision"].get<double>(), 2.0 / 3.0, 1e-12);
}

TEST_F(CliTest, EvalLengthMismatch) {
  write_series(dir_ / "s.csv", Series{0, 1, 2});
  std::ofstream(dir_ / "l.csv") << "0\n1\n";
  EvalOptions e;
  e.scores = dir_ / "s.csv";
  e.labels = dir_ / "l.csv";
  std::ostringstream err;
  EXPECT_EQ(cmd_eval(e, sink_, err), 2);
  EXPECT_EQ(err.str().rfind("error: LengthMismatch: ", 0), 0u) << err.str();
}

TEST_F(CliTest, BenchRecordsEveryTrial) {
  synth_small(dir_ / "syn");
  BenchOptions b;
  b.config = dir_ / "small.cfg";
  b.train = dir_ / "syn" / "train.csv";
  b.test = dir_ / "syn" / "test.csv";
  b.trials = 3;
  b.threads = 2;
  b.out = dir_ / "bench.json";
  ASSERT_EQ(cmd_bench(b, sink_, sink_), 0) << sink_.str();
  auto r = json::parse(slurp(dir_ / "bench.json"));
  EXPECT_EQ(r["SE"]["wall_clock"]["samples"].size(), 3u);
  EXPECT_EQ(r["PE"]["se_total"]["samples"].size(), 3u);
  EXPECT_EQ(r["runs"].size(), 3u);
  EXPECT_TRUE(r["scores_identical"].get<bool>());
}

TEST_F(CliTest, BenchCatchesSeedFault) {
  synth_small(dir_ / "syn");
  BenchOptions b;
  b.config = dir_ / "small.cfg";
  b.train = dir_ / "syn" / "train.csv";
  b.test = dir_ / "syn" / "test.csv";
  b.trials = 1;
  b.inject_seed_fault = true;
  std::ostringstream err;
  EXPECT_EQ(cmd_bench(b, sink_, err), 4);
  EXPECT_NE(err.str().find("ScoreMismatch"), std::string::npos);
}

TEST_F(CliTest, BinaryExitCodes) {
  auto [code, err] = run_cli("detect --train " + (dir_ / "none.csv").string() + " --test x.csv --out y.csv", dir_);
  EXPECT_EQ(code, 2);
  EXPECT_EQ(err.rfind("error: MissingFile: load-train: ", 0), 0u) << err;
  EXPECT_EQ(std::count(err.begin(), err.end(), '\n'), 1);

  std::ofstream(dir_ / "bad.cfg") << "shrink_s = 1.5\n";
  std::tie(code, err) = run_cli("detect --config " + (dir_ / "bad.cfg").string() + " --train a --test b --out c", dir_);
  EXPECT_EQ(code, 2);
  EXPECT_NE(err.find("InvariantViolation"), std::string::npos);

  std::tie(code, err) = run_cli("detect --train", dir_);
  EXPECT_EQ(code, 2);
  EXPECT_EQ(err.rfind("error: ", 0), 0u);

  std::tie(code, err) = run_cli("synth --out " + (dir_ / "s").string() + " --n-train 400 --n-test 200 --channels 2", dir_);
  EXPECT_EQ(code, 0) << err;
  std::tie(code, err) = run_cli("bench --config " + (dir_ / "small.cfg").string() + " --train " +
                                    (dir_ / "s/train.csv").string() + " --test " + (dir_ / "s/test.csv").string() +
                                    " --trials 1 --inject-seed-fault",
                                dir_);
  EXPECT_EQ(code, 4) << err;
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code(ErrorKind::MissingFile), 2);
  EXPECT_EQ(exit_code(ErrorKind::LengthMismatch), 2);
  EXPECT_EQ(exit_code(ErrorKind::NumericalFailure), 3);
  EXPECT_EQ(exit_code(ErrorKind::SingularSystem), 3);
  EXPECT_EQ(exit_code(ErrorKind::ScoreMismatch), 4);
}

}  // namespace
}  // namespace cpatchbls
