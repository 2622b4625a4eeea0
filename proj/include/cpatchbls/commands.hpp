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

#ifndef CPATCHBLS_COMMANDS_HPP
#define CPATCHBLS_COMMANDS_HPP

// The subcommands behind tools/cpatchbls. Each returns a process exit code:
// 0 success, 2 input error, 3 numerical failure, 4 SE/PE score mismatch.
// Failures print exactly one line to `err`:
//   error: <Kind>: <stage>: <detail>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cpatchbls/dataio.hpp"
#include "cpatchbls/ensemble.hpp"
#include "cpatchbls/evalmetrics.hpp"
#include "cpatchbls/model_io.hpp"
#include "cpatchbls/report.hpp"
#include "cpatchbls/synth.hpp"

namespace cpatchbls {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitNumerical = 3, kExitMismatch = 4 };

constexpr int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NumericalFailure:
    case ErrorKind::SingularSystem: return kExitNumerical;
    case ErrorKind::ScoreMismatch: return kExitMismatch;
    default: return kExitInput;
  }
}

namespace detail {

/// Runs `body`, tracking the current stage name for error messages.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  std::string stage = "init";
  try {
    body(stage);
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << stage << ": " << e.detail() << '\n';
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    err << "error: IoFailure: " << stage << ": " << e.what() << '\n';
    return kExitInput;
  }
}

inline CsvTable load_table(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::MissingFile, path.string());
  return load_csv(path, sniff_header(path));
}

inline fs::path sibling(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out.replace_extension(suffix);
  return out;
}

}  // namespace detail

/// Reads train/test CSVs and z-scores both with training statistics.
inline TimeSeriesDataset load_normalized_dataset(const fs::path& train_path, const fs::path& test_path,
                                                 std::vector<int> labels = {}) {
  auto train = detail::load_table(train_path);
  auto test = detail::load_table(test_path);
  auto norm = zscore_normalize(train.values, test.values);
  return make_dataset(std::move(norm.train), std::move(norm.test), std::move(labels), train.header);
}

inline RunConfig load_config_or_default(const std::optional<fs::path>& path) {
  if (!path) return RunConfig{};
  if (!fs::exists(*path)) throw Error(ErrorKind::MissingFile, path->string());
  return parse_config(*path);
}

// ---------------------------------------------------------------------------

struct DetectOptions {
  std::optional<fs::path> config;
  fs::path train;
  fs::path test;
  fs::path out;
  std::optional<ExecMode> mode;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> timing_out;   // default: <out>.timing.json
  std::optional<fs::path> dump_models;  // directory for binary model dumps
};

inline int cmd_detect(const DetectOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&](std::string& stage) {
    stage = "config";
    RunConfig cfg = load_config_or_default(opt.config);
    if (opt.mode) cfg.exec_mode = *opt.mode;
    if (opt.seed) cfg.master_seed = *opt.seed;

    stage = "load-train";
    if (!fs::exists(opt.train)) throw Error(ErrorKind::MissingFile, opt.train.string());
    stage = "load-test";
    if (!fs::exists(opt.test)) throw Error(ErrorKind::MissingFile, opt.test.string());
    stage = "load-data";
    auto data = load_normalized_dataset(opt.train, opt.test);

    stage = "detect";
    ExecOptions exec{cfg.exec_mode, opt.threads.value_or(default_threads()), false, opt.dump_models.has_value()};
    auto run = run_cpatchbls(data, cfg, exec);

    stage = "write-scores";
    write_series(opt.out, run.final.scores);
    stage = "write-timing";
    const auto timing_path = opt.timing_out.value_or(detail::sibling(opt.out, ".timing.json"));
    write_json(timing_path, timing_json(measure_timings(run), cfg.exec_mode));

    if (opt.dump_models) {
      stage = "dump-models";
      fs::create_directories(*opt.dump_models);
      for (std::size_t s = 0; s < run.models.size(); ++s) {
        const auto& dual = run.models[s];
        for (std::size_t c = 0; c < dual.channels(); ++c) {
          const auto base = "s" + std::to_string(s) + "_p" + std::to_string(dual.patch_size) + "_c" +
                            std::to_string(c);
          save_model(*opt.dump_models / (base + "_basic.pbls"), dual.basic[c]);
          save_model(*opt.dump_models / (base + "_skp.pbls"), dual.skp[c]);
        }
      }
    }
    out << "wrote " << run.final.size() << " scores to " << opt.out.string() << " (" << to_string(cfg.exec_mode)
        << ", " << run.wall_clock << " s)\n";
  });
}

// ---------------------------------------------------------------------------

struct EvalOptions {
  fs::path scores;
  fs::path labels;
  double anomaly_ratio = 0.05;
  ThresholdMode mode = ThresholdMode::BestF1Sweep;
  std::optional<fs::path> out;  // default: <scores>.metrics.json
};

inline int cmd_eval(const EvalOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&](std::string& stage) {
    stage = "load-scores";
    if (!fs::exists(opt.scores)) throw Error(ErrorKind::MissingFile, opt.scores.string());
    const auto scores = load_series(opt.scores);
    stage = "load-labels";
    const auto labels = load_labels(opt.labels);
    stage = "evaluate";
    if (scores.size() != labels.size())
      throw Error(ErrorKind::LengthMismatch,
                  std::to_string(scores.size()) + " scores vs " + std::to_string(labels.size()) + " labels");
    const auto report = evaluate(scores, labels, opt.anomaly_ratio, opt.mode);
    const auto j = metrics_json(report, opt.anomaly_ratio);
    stage = "write-metrics";
    write_json(opt.out.value_or(detail::sibling(opt.scores, ".metrics.json")), j);
    out << j.dump(2) << '\n';
  });
}

// ---------------------------------------------------------------------------

struct BenchOptions {
  std::optional<fs::path> config;
  fs::path train;
  fs::path test;
  int trials = 3;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
  bool inject_seed_fault = false;
};

struct SampleStats {
  double mean = 0.0;
  double std = 0.0;
};

inline SampleStats sample_stats(const std::vector<double>& xs) {
  SampleStats s;
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

inline int cmd_bench(const BenchOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&](std::string& stage) {
    stage = "config";
    RunConfig cfg = load_config_or_default(opt.config);
    if (opt.seed) cfg.master_seed = *opt.seed;
    if (opt.trials < 1) throw Error(ErrorKind::InvariantViolation, "trials");
    stage = "load-data";
    auto data = load_normalized_dataset(opt.train, opt.test);
    const unsigned threads = opt.threads.value_or(default_threads());

    struct Series3 {
      std::vector<double> wall, se_total, pe_total;
    } se, pe;
    json trials = json::array();
    for (int trial = 0; trial < opt.trials; ++trial) {
      stage = "trial " + std::to_string(trial) + " SE";
      auto run_se = run_cpatchbls(data, cfg, ExecOptions{ExecMode::SE, 1, false, false});
      stage = "trial " + std::to_string(trial) + " PE";
      auto run_pe = run_cpatchbls(data, cfg, ExecOptions{ExecMode::PE, threads, opt.inject_seed_fault, false});

      stage = "trial " + std::to_string(trial) + " compare";
      const auto& a = run_se.final.scores;
      const auto& b = run_pe.final.scores;
      if (a.size() != b.size()) throw Error(ErrorKind::ScoreMismatch, "score lengths differ");
      for (std::size_t t = 0; t < a.size(); ++t)
        if (a[t] != b[t])
          throw Error(ErrorKind::ScoreMismatch, "SE and PE scores differ at t=" + std::to_string(t));

      const auto rep_se = measure_timings(run_se);
      const auto rep_pe = measure_timings(run_pe);
      se.wall.push_back(rep_se.wall_clock);
      se.se_total.push_back(rep_se.se_total);
      se.pe_total.push_back(rep_se.pe_total);
      pe.wall.push_back(rep_pe.wall_clock);
      pe.se_total.push_back(rep_pe.se_total);
      pe.pe_total.push_back(rep_pe.pe_total);
      trials.push_back({{"SE", timing_json(rep_se, ExecMode::SE)}, {"PE", timing_json(rep_pe, ExecMode::PE)}});
    }

    auto summarize = [](const Series3& s) {
      json j;
      for (auto [name, xs] : {std::pair{"wall_clock", &s.wall}, {"se_total", &s.se_total}, {"pe_total", &s.pe_total}}) {
        const auto st = sample_stats(*xs);
        j[name] = {{"samples", *xs}, {"mean", st.mean}, {"std", st.std}};
      }
      return j;
    };
    json report;
    report["trials"] = opt.trials;
    report["threads"] = threads;
    report["scores_identical"] = true;
    report["SE"] = summarize(se);
    report["PE"] = summarize(pe);
    report["runs"] = std::move(trials);

    if (opt.out) {
      stage = "write-report";
      write_json(*opt.out, report);
    }
    const auto se_wall = sample_stats(se.wall), pe_wall = sample_stats(pe.wall);
    out << "trials=" << opt.trials << " threads=" << threads << " scores identical across SE/PE\n"
        << "SE wall clock: " << se_wall.mean << " +- " << se_wall.std << " s\n"
        << "PE wall clock: " << pe_wall.mean << " +- " << pe_wall.std << " s\n";
  });
}

// ---------------------------------------------------------------------------

struct SynthOptions {
  SynthSpec spec;
  fs::path out_dir;
};

inline int cmd_synth(const SynthOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&](std::string& stage) {
    stage = "generate";
    auto data = make_synthetic(opt.spec);
    stage = "write";
    fs::create_directories(opt.out_dir);
    std::vector<std::string> header;
    for (int c = 0; c < opt.spec.channels; ++c) header.push_back("ch" + std::to_string(c));
    write_csv(opt.out_dir / "train.csv", data.train, header);
    write_csv(opt.out_dir / "test.csv", data.test, header);
    Matrix labels(static_cast<Eigen::Index>(data.labels.size()), 1);
    for (std::size_t i = 0; i < data.labels.size(); ++i) labels(static_cast<Eigen::Index>(i), 0) = data.labels[i];
    write_csv(opt.out_dir / "labels.csv", labels);
    const auto positives = std::count(data.labels.begin(), data.labels.end(), 1);
    out << "wrote " << opt.out_dir.string() << ": train " << data.train.rows() << "x" << data.train.cols()
        << ", test " << data.test.rows() << "x" << data.test.cols() << ", " << positives << " anomalous steps in "
        << data.events.size() << " events\n";
  });
}

}  // namespace cpatchbls

#endif  // CPATCHBLS_COMMANDS_HPP
