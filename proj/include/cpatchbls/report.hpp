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

#ifndef CPATCHBLS_REPORT_HPP
#define CPATCHBLS_REPORT_HPP

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

#include "cpatchbls/ensemble.hpp"
#include "cpatchbls/evalmetrics.hpp"

namespace cpatchbls {

using json = nlohmann::ordered_json;

/// {"mode", "scales": {"<patch>": {fit_seconds, score_seconds}}, se_total,
/// pe_total, wall_clock}. A repeated patch size gets a "#<index>" suffix.
inline json timing_json(const TimingReport& report, ExecMode mode) {
  json j;
  j["mode"] = std::string(to_string(mode));
  json scales = json::object();
  for (std::size_t i = 0; i < report.per_scale.size(); ++i) {
    const auto& t = report.per_scale[i];
    std::string key = std::to_string(t.patch_size);
    if (scales.contains(key)) key += "#" + std::to_string(i);
    scales[key] = {{"fit_seconds", t.fit_seconds}, {"score_seconds", t.score_seconds}};
  }
  j["scales"] = std::move(scales);
  j["se_total"] = report.se_total;
  j["pe_total"] = report.pe_total;
  j["wall_clock"] = report.wall_clock;
  return j;
}

inline json pa_json(const PaResult& r) {
  return {{"pa_f1", r.f1},
          {"pa_precision", r.precision},
          {"pa_recall", r.recall},
          {"threshold_delta", r.threshold}};
}

/// Flat headline fields followed by both threshold rules in full.
inline json metrics_json(const MetricsReport& m, double anomaly_ratio) {
  const auto& pa = m.pa();
  json j;
  j["roc_auc"] = m.roc_auc;
  j["pr_auc"] = m.pr_auc;
  j["pa_f1"] = pa.f1;
  j["pa_precision"] = pa.precision;
  j["pa_recall"] = pa.recall;
  j["threshold_delta"] = pa.threshold;
  j["mode"] = std::string(to_string(m.headline));
  j["anomaly_ratio"] = anomaly_ratio;
  j["ratio_threshold"] = pa_json(m.ratio);
  j["best_f1_sweep"] = pa_json(m.sweep);
  return j;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoFailure, path.string());
  out << j.dump(2) << '\n';
}

}  // namespace cpatchbls

#endif  // CPATCHBLS_REPORT_HPP
