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

#ifndef CPATCHBLS_SKP_HPP
#define CPATCHBLS_SKP_HPP

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cpatchbls/types.hpp"

namespace cpatchbls {

/// Random Fourier feature map approximating the Gaussian kernel
/// k(x, y) = exp(-sigma^2 |x - y|^2 / 2):
///
///   z(x)_j = sqrt(2 / d_k) * cos(omega_j . x + b_j),
///   omega_j ~ N(0, sigma^2 I),  b_j ~ U[0, 2 pi].
struct RffMap {
  Matrix omega;  // [D_in x d_k]
  RowVector b;   // [d_k]
  double sigma = 1.0;
  int d_k = 0;

  int input_dim() const { return static_cast<int>(omega.rows()); }
};

template <typename Rng>
RffMap make_rff_map(int input_dim, int d_k, double sigma, Rng& rng) {
  RffMap map;
  map.sigma = sigma;
  map.d_k = d_k;
  map.omega.resize(input_dim, d_k);
  map.b.resize(d_k);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (int r = 0; r < input_dim; ++r)
    for (int c = 0; c < d_k; ++c) map.omega(r, c) = sigma * normal(rng);
  for (int c = 0; c < d_k; ++c) map.b(c) = phase(rng);
  return map;
}

/// Row-wise feature map: [N x D_in] -> [N x d_k].
inline Matrix rff_map(const Matrix& z, const RffMap& map) {
  require_shape(z.cols() == map.omega.rows(),
                "rff input " + shape_str(z) + " vs omega " + shape_str(map.omega));
  const double scale = std::sqrt(2.0 / map.d_k);
  Matrix proj = z * map.omega;
  proj.rowwise() += map.b;
  return scale * proj.array().cos().matrix();
}

/// One map per (feature group, cascade layer), each D_ft -> d_k. The Basic
/// branch gets none.
template <typename Rng>
std::vector<std::vector<RffMap>> build_rff_maps(int groups, int layers, int d_ft, int d_k,
                                                double sigma, Rng& rng) {
  std::vector<std::vector<RffMap>> maps(static_cast<std::size_t>(groups));
  for (auto& g : maps) {
    g.reserve(static_cast<std::size_t>(layers));
    for (int k = 0; k < layers; ++k) g.push_back(make_rff_map(d_ft, d_k, sigma, rng));
  }
  return maps;
}

}  // namespace cpatchbls

#endif  // CPATCHBLS_SKP_HPP
