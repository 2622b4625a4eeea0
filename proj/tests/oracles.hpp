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

// Reference implementations used only by tests. They deliberately avoid the
// library's code paths: plain loops, no sorting tricks, no Eigen solvers.

#ifndef CPATCHBLS_TESTS_ORACLES_HPP
#define CPATCHBLS_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

/// Solves M X = B by Gaussian elimination with partial pivoting.
inline Dense solve(Dense m, Dense b) {
  const std::size_t n = m.size();
  const std::size_t k = b.empty() ? 0 : b[0].size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (m[piv][col] == 0.0) throw std::runtime_error("singular");
    std::swap(m[col], m[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m[r][col] / m[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
      for (std::size_t c = 0; c < k; ++c) b[r][c] -= f * b[col][c];
    }
  }
  Dense x(n, std::vector<double>(k, 0.0));
  for (std::size_t r = n; r-- > 0;) {
    for (std::size_t c = 0; c < k; ++c) {
      double s = b[r][c];
      for (std::size_t j = r + 1; j < n; ++j) s -= m[r][j] * x[j][c];
      x[r][c] = s / m[r][r];
    }
  }
  return x;
}

/// (A^T A + lambda I)^{-1} A^T Y with explicitly looped products.
inline Eigen::MatrixXd ridge(const Eigen::MatrixXd& a, const Eigen::MatrixXd& y, double lambda) {
  const auto n = static_cast<std::size_t>(a.rows());
  const auto d = static_cast<std::size_t>(a.cols());
  const auto s = static_cast<std::size_t>(y.cols());
  Dense m(d, std::vector<double>(d, 0.0)), rhs(d, std::vector<double>(s, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < n; ++r) acc += a(r, i) * a(r, j);
      m[i][j] = acc + (i == j ? lambda : 0.0);
    }
    for (std::size_t j = 0; j < s; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < n; ++r) acc += a(r, i) * y(r, j);
      rhs[i][j] = acc;
    }
  }
  const auto x = solve(m, rhs);
  Eigen::MatrixXd out(d, s);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < s; ++j) out(i, j) = x[i][j];
  return out;
}

/// P(pos > neg) + 0.5 P(tie) over all pairs.
inline double roc_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

/// Average precision: for each distinct threshold v (descending), predict
/// score >= v and accumulate precision * recall increment.
inline double average_precision(const std::vector<double>& s, const std::vector<int>& y) {
  std::set<double, std::greater<>> cuts(s.begin(), s.end());
  double pos = 0.0;
  for (int l : y) pos += l;
  double prev_recall = 0.0, ap = 0.0;
  for (double v : cuts) {
    double tp = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= v) (y[i] == 1 ? tp : fp) += 1.0;
    }
    const double recall = tp / pos;
    ap += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
  }
  return ap;
}

struct Prf {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

/// Flags score > delta, applies point adjustment segment by segment, and
/// counts the confusion matrix.
inline Prf pa_at(const std::vector<double>& s, const std::vector<int>& y, double delta) {
  const std::size_t n = s.size();
  std::vector<int> pred(n);
  for (std::size_t i = 0; i < n; ++i) pred[i] = s[i] > delta;
  std::size_t i = 0;
  while (i < n) {
    if (y[i] == 0) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < n && y[end] == 1) ++end;
    bool any = false;
    for (std::size_t t = i; t < end; ++t) any = any || pred[t] == 1;
    if (any)
      for (std::size_t t = i; t < end; ++t) pred[t] = 1;
    i = end;
  }
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t t = 0; t < n; ++t) {
    tp += pred[t] == 1 && y[t] == 1;
    fp += pred[t] == 1 && y[t] == 0;
    fn += pred[t] == 0 && y[t] == 1;
  }
  Prf r;
  r.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

inline double best_pa_f1(const std::vector<double>& s, const std::vector<int>& y) {
  double best = 0.0;
  for (double delta : s) best = std::max(best, pa_at(s, y, delta).f1);
  return best;
}

/// numpy-style linear quantile computed from a copy sorted by insertion.
inline double quantile(std::vector<double> v, double q) {
  for (std::size_t i = 1; i < v.size(); ++i)
    for (std::size_t j = i; j > 0 && v[j - 1] > v[j]; --j) std::swap(v[j - 1], v[j]);
  const double h = (static_cast<double>(v.size()) - 1) * q;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

/// 0.5 KL(p||q) + 0.5 KL(q||p), each direction summed separately.
inline double sym_kl(const std::vector<double>& p, const std::vector<double>& q) {
  double kl_pq = 0.0, kl_qp = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) kl_pq += p[j] * std::log(p[j] / q[j]);
  for (std::size_t j = 0; j < p.size(); ++j) kl_qp += q[j] * std::log(q[j] / p[j]);
  return 0.5 * kl_pq + 0.5 * kl_qp;
}

}  // namespace oracle

#endif  // CPATCHBLS_TESTS_ORACLES_HPP
