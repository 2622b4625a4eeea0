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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cpatchbls/contrast.hpp"
#include "oracles.hpp"

namespace cpatchbls {
namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

std::vector<double> row_of(const Matrix& m, Eigen::Index r) {
  std::vector<double> v(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) v[static_cast<std::size_t>(c)] = m(r, c);
  return v;
}

std::vector<Series> sine_channels(int n, int channels, double phase) {
  std::vector<Series> out(static_cast<std::size_t>(channels));
  for (int c = 0; c < channels; ++c) {
    out[static_cast<std::size_t>(c)].resize(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t)
      out[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)] = std::sin(0.2 * t + c + phase);
  }
  return out;
}

RunConfig small_config() {
  RunConfig cfg;
  cfg.d_ft = 8;
  cfg.g_ft = 2;
  cfg.c_ft = 2;
  cfg.d_enh = 8;
  cfg.g_enh = 2;
  cfg.c_enh = 2;
  cfg.d_k = 16;
  return cfg;
}

TEST(SoftmaxRows, Examples) {
  Matrix m(3, 2);
  m << 0, 0, std::log(2.0), 0, 1000, 0;
  Matrix p = softmax_rows(m);
  EXPECT_DOUBLE_EQ(p(0, 0), 0.5);
  EXPECT_NEAR(p(1, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p(1, 1), 1.0 / 3.0, 1e-15);
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p(2, 0), 1.0, 2e-12);  // the floored entry takes its mass from here
  EXPECT_GT(p(2, 1), 0.0);
  EXPECT_NEAR(p(2, 1), 1e-12, 1e-15);
}

TEST(SoftmaxRows, RowsSumToOne) {
  Matrix p = softmax_rows(random_matrix(50, 13, 3, 20.0));
  for (Eigen::Index r = 0; r < p.rows(); ++r) EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-12);
  EXPECT_GE(p.minCoeff(), 0.9e-12);
}

TEST(SymKlCells, Examples) {
  Matrix p(1, 2), q(1, 2);
  p << 0.75, 0.25;
  q << 0.25, 0.75;
  EXPECT_NEAR(sym_kl_cells(p, q).sum(), 0.5 * std::log(3.0), 1e-15);
  EXPECT_TRUE(sym_kl_cells(p, p).isZero(0.0));
  EXPECT_THROW(sym_kl_cells(p, Matrix::Ones(2, 2)), Error);
}

TEST(SymKlCells, RowSumsMatchScalarOracle) {
  Matrix p = softmax_rows(random_matrix(200, 9, 4, 3.0));
  Matrix q = softmax_rows(random_matrix(200, 9, 5, 3.0));
  Matrix cells = sym_kl_cells(p, q);
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const double expected = oracle::sym_kl(row_of(p, r), row_of(q, r));
    EXPECT_NEAR(cells.row(r).sum(), expected, 1e-12);
    EXPECT_GE(cells.row(r).sum(), 0.0);
  }
}

TEST(DualScore, IdenticalBranchesScoreZero) {
  auto train = sine_channels(200, 2, 0.0);
  auto dual = fit_dual(train, small_config(), 10, TaskSeeder{1, 0});
  dual.skp = dual.basic;
  auto s = dual_score(dual, sine_channels(95, 2, 0.3));
  ASSERT_EQ(s.size(), 95u);
  for (double v : s.scores) EXPECT_EQ(v, 0.0);
}

TEST(DualScore, NonnegativeFiniteWithTestLength) {
  auto train = sine_channels(300, 3, 0.0);
  for (int patch : {4, 7, 16}) {
    auto dual = fit_dual(train, small_config(), patch, TaskSeeder{2, 0});
    for (int n : {patch, 97, 128}) {
      auto s = dual_score(dual, sine_channels(n, 3, 0.7));
      ASSERT_EQ(s.size(), static_cast<std::size_t>(n));
      for (double v : s.scores) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_GE(v, 0.0);
      }
    }
  }
}

TEST(DualScore, ChannelMeanMatchesHandLoop) {
  auto train = sine_channels(240, 2, 0.0);
  auto test = sine_channels(101, 2, 1.1);
  auto dual = fit_dual(train, small_config(), 8, TaskSeeder{3, 1});
  auto s = dual_score(dual, test);
  std::vector<Series> per_channel;
  for (std::size_t c = 0; c < 2; ++c) {
    auto grid = patchify(test[c], 8);
    Matrix pb = softmax_rows(reconstruct(dual.basic[c], grid));
    Matrix ps = softmax_rows(reconstruct(dual.skp[c], grid));
    Series cells(test[c].size());
    for (std::size_t t = 0; t < cells.size(); ++t) {
      const double p = ps(static_cast<Eigen::Index>(t / 8), static_cast<Eigen::Index>(t % 8));
      const double q = pb(static_cast<Eigen::Index>(t / 8), static_cast<Eigen::Index>(t % 8));
      cells[t] = 0.5 * p * std::log(p / q) + 0.5 * q * std::log(q / p);
    }
    per_channel.push_back(cells);
  }
  for (std::size_t t = 0; t < s.size(); ++t)
    EXPECT_NEAR(s.scores[t], (per_channel[0][t] + per_channel[1][t]) / 2.0, 1e-15);
}

TEST(FitDual, StructureAndDeterminism) {
  auto train = sine_channels(200, 3, 0.0);
  auto a = fit_dual(train, small_config(), 10, TaskSeeder{7, 2}, 1);
  auto b = fit_dual(train, small_config(), 10, TaskSeeder{7, 2}, 4);
  EXPECT_EQ(a.channels(), 3u);
  EXPECT_EQ(a.skp.size(), 3u);
  EXPECT_EQ(a.patch_size, 10);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(a.basic[c].patch_size, 10);
    EXPECT_EQ(a.skp[c].branch, BranchKind::SKP);
    EXPECT_EQ(a.basic[c].head.w_o, b.basic[c].head.w_o);
    EXPECT_EQ(a.skp[c].head.w_o, b.skp[c].head.w_o);
  }
  auto test = sine_channels(90, 3, 0.4);
  EXPECT_EQ(dual_score(a, test, 1).scores, dual_score(b, test, 3).scores);
}

TEST(TaskSeeder, DistinctPerCoordinate) {
  TaskSeeder s{42, 1};
  EXPECT_NE(s(BranchKind::Basic, 0), s(BranchKind::SKP, 0));
  EXPECT_NE(s(BranchKind::Basic, 0), s(BranchKind::Basic, 1));
  EXPECT_NE(s(BranchKind::Basic, 0), (TaskSeeder{42, 2})(BranchKind::Basic, 0));
  EXPECT_EQ(s(BranchKind::SKP, 3), mix64(42, 1, BranchKind::SKP, 3));
}

}  // namespace
}  // namespace cpatchbls
