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

#ifndef CPATCHBLS_BLSCORE_HPP
#define CPATCHBLS_BLSCORE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "cpatchbls/dataio.hpp"
#include "cpatchbls/patching.hpp"
#include "cpatchbls/seed.hpp"
#include "cpatchbls/skp.hpp"
#include "cpatchbls/types.hpp"

namespace cpatchbls {

struct NodeLayer {
  Matrix weight;   // [in x out]
  RowVector bias;  // [out], broadcast over rows
};

/// Grouped, cascaded random nodes, indexed layers[group][cascade].
struct NodeBank {
  std::vector<std::vector<NodeLayer>> layers;
  Activation activation = Activation::Tanh;

  int groups() const { return static_cast<int>(layers.size()); }
  int cascades() const { return layers.empty() ? 0 : static_cast<int>(layers.front().size()); }
};

using RffMaps = std::vector<std::vector<RffMap>>;
using LayerScales = std::vector<std::vector<double>>;

inline void apply_activation(Matrix& m, Activation a) {
  switch (a) {
    case Activation::Identity: break;
    case Activation::Tanh: m = m.array().tanh().matrix(); break;
    case Activation::Relu: m = m.cwiseMax(0.0); break;
    case Activation::Sigmoid: m = (1.0 + (-m.array()).exp()).inverse().matrix(); break;
  }
}

inline Matrix pre_activation(const Matrix& in, const NodeLayer& layer) {
  require_shape(in.cols() == layer.weight.rows(),
                "layer input " + shape_str(in) + " vs weight " + shape_str(layer.weight));
  Matrix pre = in * layer.weight;
  pre.rowwise() += layer.bias;
  return pre;
}

// ---------------------------------------------------------------------------
// Feature nodes

/// Cascaded feature nodes. Layer 1 of every group reads x, layer k reads
/// layer k-1 of the same group. With `rff`, each activated output is replaced
/// by its random Fourier features before it is stored and passed on. Output
/// columns are ordered group-major, cascade-minor.
inline Matrix gen_feature_nodes(const Matrix& x, const NodeBank& bank, const RffMaps* rff = nullptr) {
  if (rff) {
    require_shape(static_cast<int>(rff->size()) == bank.groups(), "one rff row per feature group");
  }
  std::vector<Matrix> blocks;
  Eigen::Index width = 0;
  for (int g = 0; g < bank.groups(); ++g) {
    const auto& group = bank.layers[static_cast<std::size_t>(g)];
    if (rff) {
      require_shape((*rff)[static_cast<std::size_t>(g)].size() == group.size(),
                    "one rff map per feature layer");
    }
    const Matrix* input = &x;
    for (std::size_t k = 0; k < group.size(); ++k) {
      Matrix out = pre_activation(*input, group[k]);
      apply_activation(out, bank.activation);
      if (rff) out = rff_map(out, (*rff)[static_cast<std::size_t>(g)][k]);
      width += out.cols();
      blocks.push_back(std::move(out));
      input = &blocks.back();
    }
  }
  Matrix z(x.rows(), width);
  Eigen::Index col = 0;
  for (const auto& b : blocks) {
    z.middleCols(col, b.cols()) = b;
    col += b.cols();
  }
  return z;
}

// ---------------------------------------------------------------------------
// Weight refinement

/// Largest eigenvalue of the symmetric PSD matrix `g` by power iteration.
inline double largest_eigenvalue(const Matrix& g, int iters = 100) {
  if (g.rows() == 0) return 0.0;
  Vector v = Vector::Ones(g.rows()) / std::sqrt(static_cast<double>(g.rows()));
  double lambda = 0.0;
  for (int i = 0; i < iters; ++i) {
    Vector w = g * v;
    const double norm = w.norm();
    if (norm == 0.0 || !std::isfinite(norm)) return norm;
    v = w / norm;
    lambda = v.dot(g * v);
  }
  return lambda;
}

/// Sparse-autoencoder refinement of a random first-layer feature weight.
///
/// With Zt = act(x W_rand + bias), runs `iters` ISTA steps on
///   min_B 0.5 |Zt B - x|^2 + sae_lambda |B|_1
/// from B = 0 with step 1/L, L = lambda_max(Zt^T Zt), and returns B^T, which
/// has the shape of W_rand.
inline Matrix sae_refine(const Matrix& x, const Matrix& w_rand, const RowVector& bias,
                         Activation activation, double sae_lambda, int iters) {
  require_shape(x.cols() == w_rand.rows() && bias.size() == w_rand.cols(),
                "sae: x " + shape_str(x) + ", W " + shape_str(w_rand));
  if (iters < 1) throw Error(ErrorKind::InvariantViolation, "sae_iters");
  Matrix zt = x * w_rand;
  zt.rowwise() += bias;
  apply_activation(zt, activation);

  const Matrix gram = zt.transpose() * zt;
  const Matrix target = zt.transpose() * x;
  const double lipschitz = largest_eigenvalue(gram);
  if (!std::isfinite(lipschitz)) throw Error(ErrorKind::NumericalFailure, "sae: Lipschitz estimate");

  Matrix b = Matrix::Zero(w_rand.cols(), w_rand.rows());
  if (lipschitz <= 0.0) return b.transpose();
  const double step = 1.0 / lipschitz;
  const double thresh = sae_lambda * step;
  for (int it = 0; it < iters; ++it) {
    Matrix next = b - step * (gram * b - target);
    b = next.unaryExpr([thresh](double v) {
      return v > thresh ? v - thresh : (v < -thresh ? v + thresh : 0.0);
    });
  }
  return b.transpose();
}

/// Modified Gram-Schmidt (two passes) over the smaller side of `w`: columns
/// when rows >= cols, otherwise rows. Directions that vanish after projection
/// are replaced by random unit vectors orthogonal to the ones kept so far.
template <typename Rng>
Matrix orthonormalize(const Matrix& w, Rng& rng) {
  const bool by_cols = w.rows() >= w.cols();
  Matrix g = by_cols ? w : Matrix(w.transpose());
  std::normal_distribution<double> normal(0.0, 1.0);

  auto project_out = [&](Vector& v, Eigen::Index upto) {
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < upto; ++j) v -= g.col(j).dot(v) * g.col(j);
  };

  for (Eigen::Index i = 0; i < g.cols(); ++i) {
    Vector v = g.col(i);
    const double original = v.norm();
    project_out(v, i);
    double norm = v.norm();
    if (!(norm > 1e-10 * std::max(original, 1.0))) {
      do {
        for (Eigen::Index r = 0; r < v.size(); ++r) v(r) = normal(rng);
        project_out(v, i);
        norm = v.norm();
      } while (!(norm > 1e-6));
    }
    g.col(i) = v / norm;
  }
  return by_cols ? g : Matrix(g.transpose());
}

inline Matrix orthonormalize(const Matrix& w) {
  std::mt19937_64 rng(0x5eed0f0a7ULL);
  return orthonormalize(w, rng);
}

// ---------------------------------------------------------------------------
// Enhancement nodes

struct EnhancementOutput {
  Matrix h;            // [N x T_enh]
  LayerScales scales;  // [group][cascade]
};

namespace detail {

template <typename ScaleFn>
Matrix run_enhancement(const Matrix& z, const NodeBank& bank, ScaleFn&& scale_for) {
  std::vector<Matrix> blocks;
  Eigen::Index width = 0;
  for (int g = 0; g < bank.groups(); ++g) {
    const auto& group = bank.layers[static_cast<std::size_t>(g)];
    const Matrix* input = &z;
    for (std::size_t v = 0; v < group.size(); ++v) {
      Matrix out = pre_activation(*input, group[v]);
      out *= scale_for(g, static_cast<int>(v), out);
      apply_activation(out, bank.activation);
      width += out.cols();
      blocks.push_back(std::move(out));
      input = &blocks.back();
    }
  }
  Matrix h(z.rows(), width);
  Eigen::Index col = 0;
  for (const auto& b : blocks) {
    h.middleCols(col, b.cols()) = b;
    col += b.cols();
  }
  return h;
}

}  // namespace detail

/// Fitting pass: every pre-activation P is multiplied by
/// shrink_s / max(1e-12, max|P|) before the activation. The scales are
/// returned for reuse at inference.
inline EnhancementOutput gen_enhancement_nodes(const Matrix& z, const NodeBank& bank, double shrink_s) {
  EnhancementOutput out;
  out.scales.assign(static_cast<std::size_t>(bank.groups()), {});
  out.h = detail::run_enhancement(z, bank, [&](int g, int, const Matrix& pre) {
    const double peak = pre.size() ? pre.cwiseAbs().maxCoeff() : 0.0;
    const double scale = shrink_s / std::max(1e-12, peak);
    out.scales[static_cast<std::size_t>(g)].push_back(scale);
    return scale;
  });
  return out;
}

/// Inference pass with frozen scales.
inline Matrix apply_enhancement_nodes(const Matrix& z, const NodeBank& bank, const LayerScales& scales) {
  require_shape(static_cast<int>(scales.size()) == bank.groups(), "enhancement scales");
  return detail::run_enhancement(z, bank, [&](int g, int v, const Matrix&) {
    return scales[static_cast<std::size_t>(g)].at(static_cast<std::size_t>(v));
  });
}

// ---------------------------------------------------------------------------
// Output head

/// W_o = (A^T A + lambda I)^{-1} A^T Y through a Cholesky factorization.
inline Matrix ridge_solve(const Matrix& a, const Matrix& y, double lambda) {
  require_shape(a.rows() == y.rows(), "ridge: A " + shape_str(a) + ", Y " + shape_str(y));
  if (!(lambda >= 0.0)) throw Error(ErrorKind::InvariantViolation, "ridge lambda < 0");
  Matrix normal = Matrix::Zero(a.cols(), a.cols());
  normal.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  normal.diagonal().array() += lambda;
  Eigen::LLT<Matrix, Eigen::Lower> llt(normal);
  if (llt.info() != Eigen::Success || (lambda == 0.0 && !(llt.rcond() > 1e-14)))
    throw Error(ErrorKind::SingularSystem, "normal matrix is not positive definite");
  Matrix w = llt.solve(a.transpose() * y);
  if (!w.allFinite()) throw Error(ErrorKind::NumericalFailure, "ridge solution not finite");
  return w;
}

/// Training objective |Y - A W|_F^2 + lambda |W|_F^2.
inline double ridge_objective(const Matrix& a, const Matrix& y, const Matrix& w, double lambda) {
  return (y - a * w).squaredNorm() + lambda * w.squaredNorm();
}

struct OutputHead {
  Matrix w_o;  // [(T_ft + T_enh) x S_patch]
  double lambda = 0.0;
};

// ---------------------------------------------------------------------------
// Model

/// One fitted PatchBLS branch for one channel at one patch size.
struct PatchBlsModel {
  BranchKind branch = BranchKind::Basic;
  int patch_size = 0;
  NodeBank feature;
  NodeBank enhancement;
  LayerScales enhancement_scales;
  std::optional<RffMaps> rff;  // present iff branch == SKP
  OutputHead head;
};

namespace detail {

template <typename Rng>
NodeLayer random_layer(Eigen::Index in, Eigen::Index out, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NodeLayer layer;
  layer.weight.resize(in, out);
  layer.bias.resize(out);
  for (Eigen::Index r = 0; r < in; ++r)
    for (Eigen::Index c = 0; c < out; ++c) layer.weight(r, c) = u(rng);
  for (Eigen::Index c = 0; c < out; ++c) layer.bias(c) = u(rng);
  return layer;
}

}  // namespace detail

/// Random feature bank. Layers after the first take d_k inputs on the SKP
/// branch (their input has gone through an RFF map) and d_ft otherwise.
template <typename Rng>
NodeBank make_feature_bank(int patch_size, const RunConfig& cfg, BranchKind branch, Rng& rng) {
  NodeBank bank;
  bank.activation = cfg.feature_activation;
  const int deep_in = branch == BranchKind::SKP ? cfg.d_k : cfg.d_ft;
  bank.layers.resize(static_cast<std::size_t>(cfg.g_ft));
  for (auto& group : bank.layers)
    for (int k = 0; k < cfg.c_ft; ++k)
      group.push_back(detail::random_layer(k == 0 ? patch_size : deep_in, cfg.d_ft, rng));
  return bank;
}

template <typename Rng>
NodeBank make_enhancement_bank(int feature_width, const RunConfig& cfg, Rng& rng) {
  NodeBank bank;
  bank.activation = cfg.enh_activation;
  bank.layers.resize(static_cast<std::size_t>(cfg.g_enh));
  for (auto& group : bank.layers)
    for (int v = 0; v < cfg.c_enh; ++v)
      group.push_back(detail::random_layer(v == 0 ? feature_width : cfg.d_enh, cfg.d_enh, rng));
  return bank;
}

/// Total feature width T_ft for a branch.
inline int feature_width(const RunConfig& cfg, BranchKind branch) {
  return (branch == BranchKind::SKP ? cfg.d_k : cfg.d_ft) * cfg.c_ft * cfg.g_ft;
}

inline int enhancement_width(const RunConfig& cfg) { return cfg.d_enh * cfg.c_enh * cfg.g_enh; }

template <typename Rng>
RffMaps build_rff_maps(const RunConfig& cfg, BranchKind branch, Rng& rng) {
  if (branch == BranchKind::Basic) return {};
  return build_rff_maps(cfg.g_ft, cfg.c_ft, cfg.d_ft, cfg.d_k, cfg.sigma, rng);
}

/// A = [Z | H] for already-fitted banks.
inline Matrix latent_features(const PatchBlsModel& model, const Matrix& x) {
  Matrix z = gen_feature_nodes(x, model.feature, model.rff ? &*model.rff : nullptr);
  Matrix h = apply_enhancement_nodes(z, model.enhancement, model.enhancement_scales);
  Matrix a(x.rows(), z.cols() + h.cols());
  a << z, h;
  return a;
}

/// Fits one branch on one channel's training patches. Random draws consume a
/// single mt19937_64 stream seeded with `seed`, in this order: feature bank
/// (group-major, weights then bias per layer), RFF maps (SKP only),
/// enhancement bank, then any repair vectors needed by orthonormalization.
/// The reconstruction target is the patch matrix itself.
inline PatchBlsModel fit_patchbls(const PatchGrid& train, const RunConfig& cfg, BranchKind branch,
                                  std::uint64_t seed, Matrix* train_reconstruction = nullptr) {
  if (train.num_patches() < 1) throw Error(ErrorKind::ShapeMismatch, "empty patch grid");
  const Matrix& x = train.patches;
  std::mt19937_64 rng(seed);

  PatchBlsModel model;
  model.branch = branch;
  model.patch_size = train.patch_size;
  model.feature = make_feature_bank(train.patch_size, cfg, branch, rng);
  if (branch == BranchKind::SKP) model.rff = build_rff_maps(cfg, branch, rng);
  model.enhancement = make_enhancement_bank(feature_width(cfg, branch), cfg, rng);

  for (auto& group : model.feature.layers) {
    for (std::size_t k = 0; k < group.size(); ++k) {
      auto& layer = group[k];
      if (k == 0 && cfg.sae_enabled)
        layer.weight = sae_refine(x, layer.weight, layer.bias, cfg.feature_activation,
                                  cfg.sae_lambda, cfg.sae_iters);
      layer.weight = orthonormalize(layer.weight, rng);
    }
  }
  for (auto& group : model.enhancement.layers)
    for (auto& layer : group) layer.weight = orthonormalize(layer.weight, rng);

  Matrix z = gen_feature_nodes(x, model.feature, model.rff ? &*model.rff : nullptr);
  auto enh = gen_enhancement_nodes(z, model.enhancement, cfg.shrink_s);
  model.enhancement_scales = std::move(enh.scales);
  Matrix a(x.rows(), z.cols() + enh.h.cols());
  a << z, enh.h;

  model.head.lambda = cfg.ridge_r;
  model.head.w_o = ridge_solve(a, x, cfg.ridge_r);
  if (train_reconstruction) *train_reconstruction = a * model.head.w_o;
  return model;
}

/// Y_hat = A W_o for a grid with the model's patch size.
inline Matrix reconstruct(const PatchBlsModel& model, const PatchGrid& grid) {
  require_shape(grid.patch_size == model.patch_size && grid.patches.cols() == model.patch_size,
                "grid patch size " + std::to_string(grid.patch_size) + " vs model " +
                    std::to_string(model.patch_size));
  return latent_features(model, grid.patches) * model.head.w_o;
}

/// Per-cell squared reconstruction error.
inline Matrix recon_score(const Matrix& y, const Matrix& y_hat) {
  require_shape(y.rows() == y_hat.rows() && y.cols() == y_hat.cols(),
                shape_str(y) + " vs " + shape_str(y_hat));
  return (y - y_hat).array().square().matrix();
}

}  // namespace cpatchbls

#endif  // CPATCHBLS_BLSCORE_HPP
