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

#ifndef CPATCHBLS_CONTRAST_HPP
#define CPATCHBLS_CONTRAST_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cpatchbls/blscore.hpp"
#include "cpatchbls/patching.hpp"
#include "cpatchbls/seed.hpp"
#include "cpatchbls/task_pool.hpp"

namespace cpatchbls {

/// Per-timestep anomaly scores aligned to the test series.
struct ScoreSeries {
  Series scores;
  std::string tag;

  std::size_t size() const { return scores.size(); }
};

/// Row-wise softmax with max subtraction. Entries are floored at 1e-12 and
/// each row renormalized.
inline Matrix softmax_rows(const Matrix& m) {
  Matrix p(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double peak = m.row(r).maxCoeff();
    RowVector e = (m.row(r).array() - peak).exp().matrix();
    e /= e.sum();
    e = e.cwiseMax(1e-12);
    p.row(r) = e / e.sum();
  }
  return p;
}

/// cell(r, j) = 0.5 p ln(p/q) + 0.5 q ln(q/p); each row sums to the
/// symmetric KL divergence between row r of P and row r of Q.
inline Matrix sym_kl_cells(const Matrix& p, const Matrix& q) {
  require_shape(p.rows() == q.rows() && p.cols() == q.cols(), shape_str(p) + " vs " + shape_str(q));
  return (0.5 * p.array() * (p.array() / q.array()).log() +
          0.5 * q.array() * (q.array() / p.array()).log())
      .matrix();
}

/// Per-timestep disagreement for one channel given both branch
/// reconstructions laid out as a patch grid.
inline Series disagreement_series(const Matrix& basic_recon, const Matrix& skp_recon, int original_len) {
  return unpatchify(sym_kl_cells(softmax_rows(skp_recon), softmax_rows(basic_recon)), original_len);
}

/// Produces the seed of each (branch, channel) task of one scale.
struct TaskSeeder {
  std::uint64_t master = 0;
  std::uint64_t scale_index = 0;
  // Test hook: perturbs the derivation so determinism checks can be
  // shown to catch a broken seed path.
  bool fault = false;

  std::uint64_t operator()(BranchKind branch, std::size_t channel) const {
    return mix64(master, scale_index, branch, channel) ^ (fault ? 1u : 0u);
  }
};

struct DualModel {
  std::vector<PatchBlsModel> basic;  // one per channel
  std::vector<PatchBlsModel> skp;    // one per channel
  int patch_size = 0;

  std::size_t channels() const { return basic.size(); }
};

/// Fits the Basic and SKP branches of every channel on training data. The
/// (channel x branch) tasks run on up to `workers` threads.
inline DualModel fit_dual(const std::vector<Series>& train_channels, const RunConfig& cfg,
                          int patch_size, const TaskSeeder& seeder, unsigned workers = 1) {
  if (train_channels.empty()) throw Error(ErrorKind::ShapeMismatch, "no training channels");
  const std::size_t c = train_channels.size();
  std::vector<PatchGrid> grids(c);
  for (std::size_t i = 0; i < c; ++i) grids[i] = patchify(train_channels[i], patch_size);

  DualModel dual;
  dual.patch_size = patch_size;
  dual.basic.resize(c);
  dual.skp.resize(c);
  parallel_for(2 * c, workers, [&](std::size_t task) {
    const std::size_t ch = task / 2;
    const BranchKind branch = task % 2 == 0 ? BranchKind::Basic : BranchKind::SKP;
    auto& slot = branch == BranchKind::Basic ? dual.basic[ch] : dual.skp[ch];
    slot = fit_patchbls(grids[ch], cfg, branch, seeder(branch, ch));
  });
  return dual;
}

/// Score_diff: per channel, symmetric KL between row-softmaxed branch
/// reconstructions, spread over cells and unpatchified; then the mean over
/// channels.
inline ScoreSeries dual_score(const DualModel& dual, const std::vector<PatchGrid>& test_grids,
                              unsigned workers = 1) {
  require_shape(test_grids.size() == dual.channels() && dual.skp.size() == dual.channels(),
                "dual_score: " + std::to_string(test_grids.size()) + " test channels vs " +
                    std::to_string(dual.channels()) + " models");
  if (test_grids.empty()) throw Error(ErrorKind::ShapeMismatch, "no test channels");
  const int n = test_grids.front().original_len;
  std::vector<Series> per_channel(test_grids.size());
  parallel_for(test_grids.size(), workers, [&](std::size_t ch) {
    const auto& grid = test_grids[ch];
    require_shape(grid.original_len == n, "test channels differ in length");
    per_channel[ch] = disagreement_series(reconstruct(dual.basic[ch], grid),
                                          reconstruct(dual.skp[ch], grid), grid.original_len);
  });
  ScoreSeries out;
  out.tag = "patch=" + std::to_string(dual.patch_size);
  out.scores.assign(static_cast<std::size_t>(n), 0.0);
  for (const auto& s : per_channel)
    for (std::size_t t = 0; t < s.size(); ++t) out.scores[t] += s[t];
  for (double& v : out.scores) v /= static_cast<double>(per_channel.size());
  return out;
}

inline ScoreSeries dual_score(const DualModel& dual, const std::vector<Series>& test_channels,
                              unsigned workers = 1) {
  std::vector<PatchGrid> grids;
  grids.reserve(test_channels.size());
  for (const auto& s : test_channels) grids.push_back(patchify(s, dual.patch_size));
  return dual_score(dual, grids, workers);
}

}  // namespace cpatchbls

#endif  // CPATCHBLS_CONTRAST_HPP
