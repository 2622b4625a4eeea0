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

#ifndef CPATCHBLS_ENSEMBLE_HPP
#define CPATCHBLS_ENSEMBLE_HPP

#include <algorithm>
#include <chrono>
#include <numeric>
#include <string>
#include <vector>

#include "cpatchbls/contrast.hpp"
#include "cpatchbls/dataio.hpp"
#include "cpatchbls/patching.hpp"
#include "cpatchbls/task_pool.hpp"

namespace cpatchbls {

struct ScaleTiming {
  int patch_size = 0;
  double fit_seconds = 0.0;
  double score_seconds = 0.0;

  double total() const { return fit_seconds + score_seconds; }
};

struct EnsembleRun {
  std::vector<ScoreSeries> sub_scores;  // one per patch size, config order
  ScoreSeries final;
  std::vector<ScaleTiming> timings;
  double wall_clock = 0.0;
  ExecMode mode = ExecMode::SE;
  std::vector<DualModel> models;  // filled only with ExecOptions::keep_models
};

struct ExecOptions {
  ExecMode mode = ExecMode::SE;
  unsigned threads = default_threads();
  // Perturbs per-task seeds in PE mode only. Used to check that SE/PE
  // comparison catches seed-derivation bugs; never set in normal runs.
  bool inject_seed_fault = false;
  bool keep_models = false;
};

/// Pointwise arithmetic mean. With `minmax`, every series is first rescaled
/// to [0, 1] (a constant series becomes all zeros).
inline ScoreSeries aggregate_scores(const std::vector<ScoreSeries>& subs, bool minmax = false) {
  if (subs.empty()) throw Error(ErrorKind::LengthMismatch, "no score series to aggregate");
  const std::size_t n = subs.front().size();
  for (const auto& s : subs)
    if (s.size() != n)
      throw Error(ErrorKind::LengthMismatch,
                  std::to_string(s.size()) + " vs " + std::to_string(n));
  ScoreSeries out;
  out.tag = "ensemble";
  if (subs.size() == 1 && !minmax) {
    out.scores = subs.front().scores;
    return out;
  }
  out.scores.assign(n, 0.0);
  for (const auto& s : subs) {
    double lo = 0.0, span = 1.0;
    if (minmax && n > 0) {
      auto [mn, mx] = std::minmax_element(s.scores.begin(), s.scores.end());
      lo = *mn;
      span = *mx - *mn;
    }
    for (std::size_t t = 0; t < n; ++t) {
      if (!minmax) out.scores[t] += s.scores[t];
      else out.scores[t] += span > 0.0 ? (s.scores[t] - lo) / span : 0.0;
    }
  }
  for (double& v : out.scores) v /= static_cast<double>(subs.size());
  return out;
}

/// Multi-scale Dual-PatchBLS. Each patch size is an independent sub-model
/// fitted on the training split and scored on the test split; the final score
/// is the mean over sub-models.
///
/// SE runs sub-models one after another on the calling thread. PE runs them
/// concurrently, spreading any spare threads over each sub-model's
/// (channel x branch) tasks. Both produce bit-identical scores because every
/// task seeds itself from its coordinates.
inline EnsembleRun run_cpatchbls(const TimeSeriesDataset& data, const RunConfig& cfg,
                                 const ExecOptions& exec) {
  validate(cfg);
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();

  const auto train = split_channels(data.train_values);
  const auto test = split_channels(data.test_values);
  const std::size_t scales = cfg.patch_sizes.size();

  EnsembleRun run;
  run.mode = exec.mode;
  run.sub_scores.resize(scales);
  run.timings.resize(scales);
  if (exec.keep_models) run.models.resize(scales);

  const bool parallel = exec.mode == ExecMode::PE;
  const unsigned outer = parallel ? std::max(1u, std::min<unsigned>(exec.threads, static_cast<unsigned>(scales))) : 1u;
  const unsigned inner = parallel ? std::max(1u, exec.threads / static_cast<unsigned>(scales)) : 1u;

  parallel_for(scales, outer, [&](std::size_t i) {
    const int patch = cfg.patch_sizes[i];
    TaskSeeder seeder{cfg.master_seed, i, parallel && exec.inject_seed_fault};
    auto& timing = run.timings[i];
    timing.patch_size = patch;

    const auto t0 = clock::now();
    DualModel dual = fit_dual(train, cfg, patch, seeder, inner);
    const auto t1 = clock::now();
    run.sub_scores[i] = dual_score(dual, test, inner);
    const auto t2 = clock::now();

    timing.fit_seconds = std::chrono::duration<double>(t1 - t0).count();
    timing.score_seconds = std::chrono::duration<double>(t2 - t1).count();
    if (exec.keep_models) run.models[i] = std::move(dual);
  });

  run.final = aggregate_scores(run.sub_scores, cfg.score_minmax);
  run.wall_clock = std::chrono::duration<double>(clock::now() - start).count();
  return run;
}

inline EnsembleRun run_cpatchbls(const TimeSeriesDataset& data, const RunConfig& cfg) {
  return run_cpatchbls(data, cfg, ExecOptions{cfg.exec_mode, default_threads(), false, false});
}

struct TimingReport {
  std::vector<ScaleTiming> per_scale;
  double se_total = 0.0;  // sum of sub-model durations
  double pe_total = 0.0;  // slowest sub-model
  double wall_clock = 0.0;
};

inline TimingReport measure_timings(const std::vector<ScaleTiming>& timings, double wall_clock) {
  TimingReport report;
  report.per_scale = timings;
  for (const auto& t : timings) {
    report.se_total += t.total();
    report.pe_total = std::max(report.pe_total, t.total());
  }
  report.wall_clock = wall_clock;
  return report;
}

inline TimingReport measure_timings(const EnsembleRun& run) {
  return measure_timings(run.timings, run.wall_clock);
}

}  // namespace cpatchbls

#endif  // CPATCHBLS_ENSEMBLE_HPP
