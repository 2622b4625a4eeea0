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

#ifndef CPATCHBLS_EVALMETRICS_HPP
#define CPATCHBLS_EVALMETRICS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "cpatchbls/error.hpp"

namespace cpatchbls {

enum class ThresholdMode { RatioThreshold, BestF1Sweep };

constexpr std::string_view to_string(ThresholdMode m) {
  return m == ThresholdMode::RatioThreshold ? "ratio_threshold" : "best_f1_sweep";
}

struct PaResult {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 0.0;  // delta
  ThresholdMode mode = ThresholdMode::RatioThreshold;
};

namespace detail {

inline void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorKind::LengthMismatch, std::to_string(a) + " vs " + std::to_string(b));
}

inline std::vector<std::size_t> order_descending(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  return idx;
}

inline double f1_from(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

}  // namespace detail

/// Area under the ROC curve as the Mann-Whitney statistic
/// P(s_pos > s_neg) + 0.5 P(s_pos == s_neg), using average ranks for ties.
inline double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  detail::check_lengths(scores.size(), labels.size());
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double pos = 0.0, rank_sum = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]] == 1) {
        pos += 1.0;
        rank_sum += avg_rank;
      }
    }
    i = j;
  }
  const double neg = static_cast<double>(scores.size()) - pos;
  if (pos == 0.0 || neg == 0.0) throw Error(ErrorKind::DegenerateLabels, "roc_auc needs both classes");
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

/// Average precision. Cuts are placed between distinct score values, so
/// tied scores enter together.
inline double pr_auc(std::span<const double> scores, std::span<const int> labels) {
  detail::check_lengths(scores.size(), labels.size());
  const double total_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  if (total_pos == 0.0) throw Error(ErrorKind::DegenerateLabels, "pr_auc needs a positive label");
  const auto idx = detail::order_descending(scores);
  double tp = 0.0, fp = 0.0, ap = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    double new_tp = 0.0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      if (labels[idx[j]] == 1) new_tp += 1.0;
      else fp += 1.0;
      ++j;
    }
    tp += new_tp;
    if (new_tp > 0.0) ap += (tp / (tp + fp)) * (new_tp / total_pos);
    i = j;
  }
  return ap;
}

/// Point adjustment: a ground-truth anomaly segment with at least one
/// positive prediction becomes fully predicted.
inline std::vector<int> point_adjust(std::span<const int> preds, std::span<const int> labels) {
  detail::check_lengths(preds.size(), labels.size());
  std::vector<int> out(preds.begin(), preds.end());
  for (std::size_t i = 0; i < labels.size();) {
    if (labels[i] != 1) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool hit = false;
    while (j < labels.size() && labels[j] == 1) hit |= preds[j++] == 1;
    if (hit) std::fill(out.begin() + static_cast<std::ptrdiff_t>(i), out.begin() + static_cast<std::ptrdiff_t>(j), 1);
    i = j;
  }
  return out;
}

/// Linear-interpolation quantile (q in [0, 1]) of an unsorted sample.
inline double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::LengthMismatch, "quantile of empty sample");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const double h = (static_cast<double>(s.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

struct Thresholded {
  std::vector<int> preds;
  double delta = 0.0;
};

/// delta = (1 - anomaly_ratio)-quantile of the scores; pred = score > delta.
inline Thresholded threshold_by_ratio(std::span<const double> scores, double anomaly_ratio) {
  if (!(anomaly_ratio > 0.0 && anomaly_ratio < 1.0))
    throw Error(ErrorKind::InvariantViolation, "anomaly_ratio");
  Thresholded out;
  out.delta = quantile(scores, 1.0 - anomaly_ratio);
  out.preds.reserve(scores.size());
  for (double s : scores) out.preds.push_back(s > out.delta ? 1 : 0);
  return out;
}

/// Precision/recall/F1 of already point-adjusted predictions.
inline PaResult confusion_scores(std::span<const int> preds, std::span<const int> labels) {
  detail::check_lengths(preds.size(), labels.size());
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == 1 && labels[i] == 1) ++tp;
    else if (preds[i] == 1) ++fp;
    else if (labels[i] == 1) ++fn;
  }
  PaResult r;
  r.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  r.f1 = detail::f1_from(r.precision, r.recall);
  return r;
}

namespace detail {

// PA-F1 for every candidate threshold at once. Under point adjustment a
// segment counts as detected iff its maximum score exceeds delta, so
// TP(delta) = total length of segments with max > delta and FP(delta) = number
// of normal points above delta. Both are step functions of delta evaluated
// with binary search.
inline PaResult best_pa_sweep(std::span<const double> scores, std::span<const int> labels) {
  std::vector<double> normal;
  std::vector<std::pair<double, double>> segments;  // (max score, length)
  for (std::size_t i = 0; i < labels.size();) {
    if (labels[i] != 1) {
      normal.push_back(scores[i]);
      ++i;
      continue;
    }
    std::size_t j = i;
    double peak = scores[i];
    while (j < labels.size() && labels[j] == 1) peak = std::max(peak, scores[j++]);
    segments.emplace_back(peak, static_cast<double>(j - i));
    i = j;
  }
  std::sort(normal.begin(), normal.end());
  std::sort(segments.begin(), segments.end());
  std::vector<double> seg_peaks(segments.size());
  std::vector<double> len_suffix(segments.size() + 1, 0.0);
  for (std::size_t k = segments.size(); k-- > 0;) {
    seg_peaks[k] = segments[k].first;
    len_suffix[k] = len_suffix[k + 1] + segments[k].second;
  }
  const double total_pos = len_suffix[0];

  std::vector<double> candidates(scores.begin(), scores.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  PaResult best;
  best.mode = ThresholdMode::BestF1Sweep;
  best.threshold = candidates.empty() ? 0.0 : candidates.front();
  bool first = true;
  for (double delta : candidates) {
    const auto seg_above = static_cast<std::size_t>(
        std::upper_bound(seg_peaks.begin(), seg_peaks.end(), delta) - seg_peaks.begin());
    const double tp = len_suffix[seg_above];
    const double fp = static_cast<double>(normal.end() - std::upper_bound(normal.begin(), normal.end(), delta));
    const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double recall = total_pos > 0 ? tp / total_pos : 0.0;
    const double f1 = f1_from(precision, recall);
    if (first || f1 > best.f1) {
      best.f1 = f1;
      best.precision = precision;
      best.recall = recall;
      best.threshold = delta;
      first = false;
    }
  }
  return best;
}

}  // namespace detail

/// Point-adjusted F1 under either threshold rule.
inline PaResult pa_f1(std::span<const double> scores, std::span<const int> labels, ThresholdMode mode,
                      double anomaly_ratio) {
  detail::check_lengths(scores.size(), labels.size());
  if (std::count(labels.begin(), labels.end(), 1) == 0)
    throw Error(ErrorKind::DegenerateLabels, "PA-F1 needs a positive label");
  if (mode == ThresholdMode::BestF1Sweep) return detail::best_pa_sweep(scores, labels);
  auto th = threshold_by_ratio(scores, anomaly_ratio);
  auto r = confusion_scores(point_adjust(th.preds, labels), labels);
  r.threshold = th.delta;
  r.mode = ThresholdMode::RatioThreshold;
  return r;
}

/// Threshold-free scores plus PA-F1 under both threshold rules; `headline`
/// selects which one is reported as the primary PA-F1.
struct MetricsReport {
  double roc_auc = 0.0;
  double pr_auc = 0.0;
  PaResult ratio;
  PaResult sweep;
  ThresholdMode headline = ThresholdMode::RatioThreshold;

  const PaResult& pa() const { return headline == ThresholdMode::RatioThreshold ? ratio : sweep; }
};

inline MetricsReport evaluate(std::span<const double> scores, std::span<const int> labels,
                            double anomaly_ratio, ThresholdMode headline) {
  MetricsReport m;
  m.roc_auc = roc_auc(scores, labels);
  m.pr_auc = pr_auc(scores, labels);
  m.ratio = pa_f1(scores, labels, ThresholdMode::RatioThreshold, anomaly_ratio);
  m.sweep = pa_f1(scores, labels, ThresholdMode::BestF1Sweep, anomaly_ratio);
  m.headline = headline;
  return m;
}

}  // namespace cpatchbls

#endif  // CPATCHBLS_EVALMETRICS_HPP
