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

#ifndef CPATCHBLS_SYNTH_HPP
#define CPATCHBLS_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "cpatchbls/types.hpp"

namespace cpatchbls {

/// Desk-scale benchmark generator. Each channel is
///   sin(2 pi t / 24 + a_c) + 0.5 sin(2 pi t / 96 + b_c) + N(0, 0.05^2)
/// over a continuous clock spanning train then test. Anomalies are injected
/// into the test split only: single-point spikes (+5 channel std) and
/// level shifts of 10-50 steps (+3 channel std), each hitting a random
/// non-empty subset of channels, until about `anomaly_ratio` of the test
/// timesteps are labeled.
struct SynthSpec {
  int n_train = 4000;
  int n_test = 2000;
  int channels = 5;
  double anomaly_ratio = 0.05;
  std::uint64_t seed = 7;
};

struct SynthEvent {
  int start = 0;
  int length = 0;
  bool spike = false;
  std::vector<int> channels;
};

struct SynthData {
  Matrix train;
  Matrix test;
  std::vector<int> labels;
  std::vector<SynthEvent> events;
};

inline SynthData make_synthetic(const SynthSpec& spec) {
  if (spec.n_train < 1 || spec.n_test < 60 || spec.channels < 1)
    throw Error(ErrorKind::InvariantViolation, "synth spec needs n_train >= 1, n_test >= 60, channels >= 1");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 0.05);
  constexpr double two_pi = 2.0 * std::numbers::pi;

  const int total = spec.n_train + spec.n_test;
  Matrix all(total, spec.channels);
  for (int c = 0; c < spec.channels; ++c) {
    const double a = phase(rng), b = phase(rng);
    for (int t = 0; t < total; ++t)
      all(t, c) = std::sin(two_pi * t / 24.0 + a) + 0.5 * std::sin(two_pi * t / 96.0 + b) + noise(rng);
  }

  SynthData out;
  out.train = all.topRows(spec.n_train);
  out.test = all.bottomRows(spec.n_test);
  out.labels.assign(static_cast<std::size_t>(spec.n_test), 0);

  RowVector mean = out.test.colwise().mean();
  RowVector std = ((out.test.rowwise() - mean).colwise().squaredNorm() / spec.n_test).cwiseSqrt();

  const int budget = static_cast<int>(std::lround(spec.anomaly_ratio * spec.n_test));
  int labeled = 0;
  std::bernoulli_distribution is_spike(0.3), pick(0.5);
  std::uniform_int_distribution<int> shift_len(10, 50);
  std::uniform_int_distribution<int> any_channel(0, spec.channels - 1);

  for (int attempt = 0; labeled < budget && attempt < 100000; ++attempt) {
    const int remaining = budget - labeled;
    bool spike = is_spike(rng);
    int len = spike ? 1 : shift_len(rng);
    if (!spike && len > remaining) {
      if (remaining >= 10) len = remaining;
      else spike = true, len = 1;
    }
    std::uniform_int_distribution<int> start_dist(0, spec.n_test - len);
    const int start = start_dist(rng);
    // Keep events separated by at least one normal step.
    const int lo = std::max(0, start - 1), hi = std::min(spec.n_test, start + len + 1);
    bool clash = false;
    for (int t = lo; t < hi && !clash; ++t) clash = out.labels[static_cast<std::size_t>(t)] == 1;
    if (clash) continue;

    SynthEvent ev{start, len, spike, {}};
    for (int c = 0; c < spec.channels; ++c)
      if (pick(rng)) ev.channels.push_back(c);
    if (ev.channels.empty()) ev.channels.push_back(any_channel(rng));

    const double k = spike ? 5.0 : 3.0;
    for (int c : ev.channels)
      for (int t = start; t < start + len; ++t) out.test(t, c) += k * std(c);
    for (int t = start; t < start + len; ++t) out.labels[static_cast<std::size_t>(t)] = 1;
    labeled += len;
    out.events.push_back(std::move(ev));
  }
  return out;
}

}  // namespace cpatchbls

#endif  // CPATCHBLS_SYNTH_HPP
