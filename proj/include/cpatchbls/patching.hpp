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

#ifndef CPATCHBLS_PATCHING_HPP
#define CPATCHBLS_PATCHING_HPP

#include <span>
#include <vector>

#include "cpatchbls/types.hpp"

namespace cpatchbls {

/// One univariate channel tiled into non-overlapping patches. Timestep t of
/// the original series lives at (t / patch_size, t % patch_size).
struct PatchGrid {
  Matrix patches;  // [N_patch x S_patch]
  int original_len = 0;
  int pad_len = 0;
  int patch_size = 0;

  int num_patches() const { return static_cast<int>(patches.rows()); }
};

/// Column i of `x` becomes channel i.
inline std::vector<Series> split_channels(const Matrix& x) {
  std::vector<Series> out(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    out[static_cast<std::size_t>(c)].resize(static_cast<std::size_t>(x.rows()));
    Eigen::Map<Vector>(out[static_cast<std::size_t>(c)].data(), x.rows()) = x.col(c);
  }
  return out;
}

inline Matrix merge_channels(const std::vector<Series>& channels) {
  if (channels.empty()) return {};
  const auto n = static_cast<Eigen::Index>(channels.front().size());
  Matrix x(n, static_cast<Eigen::Index>(channels.size()));
  for (std::size_t c = 0; c < channels.size(); ++c) {
    require_shape(static_cast<Eigen::Index>(channels[c].size()) == n, "ragged channels");
    x.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Vector>(channels[c].data(), n);
  }
  return x;
}

/// Right-pads by repeating the last value until the length divides evenly.
inline PatchGrid patchify(std::span<const double> series, int patch_size) {
  const int n = static_cast<int>(series.size());
  if (n < 1) throw Error(ErrorKind::ShapeMismatch, "empty series");
  if (patch_size < 2) throw Error(ErrorKind::InvariantViolation, "patch_size < 2");
  if (patch_size > 2 * n)
    throw Error(ErrorKind::PatchTooLarge,
                "patch size " + std::to_string(patch_size) + " for series of length " +
                    std::to_string(n));
  const int rows = (n + patch_size - 1) / patch_size;
  PatchGrid grid;
  grid.original_len = n;
  grid.pad_len = rows * patch_size - n;
  grid.patch_size = patch_size;
  grid.patches.resize(rows, patch_size);
  for (int t = 0; t < rows * patch_size; ++t)
    grid.patches(t / patch_size, t % patch_size) = series[static_cast<std::size_t>(std::min(t, n - 1))];
  return grid;
}

/// Flattens a cell matrix laid out like `grid` and drops the padded tail.
inline Series unpatchify(const Matrix& cells, int original_len) {
  require_shape(cells.size() >= original_len, "cell grid shorter than series");
  Series out(static_cast<std::size_t>(original_len));
  const auto width = cells.cols();
  for (int t = 0; t < original_len; ++t) out[static_cast<std::size_t>(t)] = cells(t / width, t % width);
  return out;
}

inline Series unpatchify(const PatchGrid& grid) {
  return unpatchify(grid.patches, grid.original_len);
}

}  // namespace cpatchbls

#endif  // CPATCHBLS_PATCHING_HPP
