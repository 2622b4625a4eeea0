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

#ifndef CPATCHBLS_DATAIO_HPP
#define CPATCHBLS_DATAIO_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "cpatchbls/types.hpp"

namespace cpatchbls {

enum class Activation { Identity, Tanh, Relu, Sigmoid };
enum class ExecMode { SE, PE };

constexpr std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "identity";
}

constexpr std::string_view to_string(ExecMode m) {
  return m == ExecMode::SE ? "SE" : "PE";
}

inline std::optional<Activation> parse_activation(std::string_view s) {
  for (auto a : {Activation::Identity, Activation::Tanh, Activation::Relu,
                 Activation::Sigmoid}) {
    if (s == to_string(a)) return a;
  }
  return std::nullopt;
}

inline std::optional<ExecMode> parse_exec_mode(std::string_view s) {
  if (s == "SE") return ExecMode::SE;
  if (s == "PE") return ExecMode::PE;
  return std::nullopt;
}

/// Hyperparameters of one CPatchBLS run. Defaults sit inside the ranges the
/// sensitivity study found favorable (groups/cascades in [4, 8] for most
/// knobs, s in [0.8, 1.0], r in [0.1, 0.3]).
struct RunConfig {
  std::vector<int> patch_sizes{8, 16, 32};
  int d_ft = 32;
  int g_ft = 4;
  int c_ft = 2;
  int d_enh = 32;
  int g_enh = 4;
  int c_enh = 2;
  double shrink_s = 0.9;
  double ridge_r = 0.1;
  int d_k = 64;
  double sigma = 1.0;
  Activation feature_activation = Activation::Tanh;
  Activation enh_activation = Activation::Tanh;
  bool sae_enabled = true;
  double sae_lambda = 1e-3;
  int sae_iters = 50;
  double anomaly_ratio = 0.05;
  std::uint64_t master_seed = 0;
  ExecMode exec_mode = ExecMode::SE;
  // Min-max normalize each per-scale score series before averaging.
  bool score_minmax = false;

  bool operator==(const RunConfig&) const = default;
};

inline void validate(const RunConfig& c) {
  auto bad = [](const char* key) { throw Error(ErrorKind::InvariantViolation, key); };
  if (c.patch_sizes.empty()) bad("patch_sizes");
  for (int s : c.patch_sizes) {
    if (s < 2) bad("patch_sizes");
  }
  if (c.d_ft <= 0) bad("d_ft");
  if (c.g_ft <= 0) bad("g_ft");
  if (c.c_ft <= 0) bad("c_ft");
  if (c.d_enh <= 0) bad("d_enh");
  if (c.g_enh <= 0) bad("g_enh");
  if (c.c_enh <= 0) bad("c_enh");
  if (!(c.shrink_s > 0.0 && c.shrink_s <= 1.0)) bad("shrink_s");
  if (!(c.ridge_r >= 0.0) || !std::isfinite(c.ridge_r)) bad("ridge_r");
  if (c.d_k <= 0) bad("d_k");
  if (!(c.sigma > 0.0) || !std::isfinite(c.sigma)) bad("sigma");
  if (!(c.sae_lambda >= 0.0) || !std::isfinite(c.sae_lambda)) bad("sae_lambda");
  if (c.sae_iters <= 0) bad("sae_iters");
  if (!(c.anomaly_ratio > 0.0 && c.anomaly_ratio < 1.0)) bad("anomaly_ratio");
}

// ---------------------------------------------------------------------------
// Number formatting / parsing

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  Int v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  Matrix values;  // rows = timesteps, columns = channels
  std::vector<std::string> header;
};

/// Loads a comma-separated numeric table. Row indices in errors count data
/// rows from 0, excluding the header.
inline CsvTable load_csv(const std::filesystem::path& path, bool has_header) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::MissingFile, path.string());
  auto lines = detail::read_lines(path);
  CsvTable table;
  std::size_t first = 0;
  if (has_header) {
    if (lines.empty()) throw Error(ErrorKind::RaggedRows, "missing header in " + path.string());
    for (auto cell : detail::split(lines[0], ','))
      table.header.emplace_back(detail::trim(cell));
    first = 1;
  }
  std::vector<std::vector<double>> rows;
  std::size_t width = has_header ? table.header.size() : 0;
  for (std::size_t i = first; i < lines.size(); ++i) {
    const std::size_t row = i - first;
    auto cells = detail::split(lines[i], ',');
    if (width == 0) width = cells.size();
    if (cells.size() != width) throw Error(ErrorKind::RaggedRows, std::to_string(row));
    std::vector<double> values;
    values.reserve(width);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      auto v = detail::parse_double(cells[c]);
      if (!v || !std::isfinite(*v))
        throw Error(ErrorKind::NonFiniteValue,
                    "(" + std::to_string(row) + ", " + std::to_string(c) + ")");
      values.push_back(*v);
    }
    rows.push_back(std::move(values));
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return table;
}

/// True when the first line of `path` contains a cell that is not a number.
inline bool sniff_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  std::string line;
  if (!std::getline(in, line)) return false;
  for (auto cell : detail::split(line, ','))
    if (!detail::parse_double(cell)) return true;
  return false;
}

/// One 0/1 label per line; a single non-numeric header line is skipped.
inline std::vector<int> load_labels(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::MissingFile, path.string());
  auto lines = detail::read_lines(path);
  std::vector<int> labels;
  labels.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto v = detail::parse_double(lines[i]);
    if (!v) {
      if (i == 0) continue;
      throw Error(ErrorKind::InvalidLabel, "line " + std::to_string(i));
    }
    if (*v != 0.0 && *v != 1.0) throw Error(ErrorKind::InvalidLabel, "line " + std::to_string(i));
    labels.push_back(static_cast<int>(*v));
  }
  return labels;
}

inline void write_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header = {}) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoFailure, path.string());
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_double(m(r, c));
    out << '\n';
  }
}

/// Scores CSV: one value per line.
inline void write_series(const std::filesystem::path& path, const Series& s) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoFailure, path.string());
  for (double v : s) out << format_double(v) << '\n';
}

inline Series load_series(const std::filesystem::path& path) {
  auto table = load_csv(path, sniff_header(path));
  if (table.values.cols() != 1)
    throw Error(ErrorKind::ShapeMismatch, "expected one column in " + path.string());
  return Series(table.values.data(), table.values.data() + table.values.rows());
}

// ---------------------------------------------------------------------------
// Dataset and normalization

struct TimeSeriesDataset {
  Matrix train_values;  // [n_train x C]
  Matrix test_values;   // [n_test x C]
  std::vector<int> test_labels;
  std::vector<std::string> channel_names;

  Eigen::Index channels() const { return train_values.cols(); }
};

/// Builds a dataset and checks its invariants. `labels` may be empty when the
/// dataset is used for detection only.
inline TimeSeriesDataset make_dataset(Matrix train, Matrix test, std::vector<int> labels,
                                      std::vector<std::string> names = {}) {
  if (train.rows() < 1 || test.rows() < 1 || train.cols() < 1)
    throw Error(ErrorKind::ShapeMismatch, "dataset needs n_train, n_test, C >= 1");
  if (train.cols() != test.cols())
    throw Error(ErrorKind::ShapeMismatch,
                "train has " + std::to_string(train.cols()) + " channels, test has " +
                    std::to_string(test.cols()));
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != test.rows())
    throw Error(ErrorKind::LengthMismatch, "labels " + std::to_string(labels.size()) +
                                               " vs test rows " + std::to_string(test.rows()));
  for (int l : labels)
    if (l != 0 && l != 1) throw Error(ErrorKind::InvalidLabel, std::to_string(l));
  if (!train.allFinite() || !test.allFinite())
    throw Error(ErrorKind::NonFiniteValue, "dataset contains NaN/Inf");
  if (names.empty()) {
    for (Eigen::Index c = 0; c < train.cols(); ++c) names.push_back("ch" + std::to_string(c));
  }
  return {std::move(train), std::move(test), std::move(labels), std::move(names)};
}

struct NormStats {
  RowVector mean;
  RowVector std;  // clamped below at 1e-8
};

struct Normalized {
  Matrix train;
  Matrix test;
  NormStats stats;
};

/// Per-channel z-score using statistics of `train` only (population std).
inline Normalized zscore_normalize(const Matrix& train, const Matrix& test) {
  if (train.cols() != test.cols())
    throw Error(ErrorKind::ShapeMismatch, shape_str(train) + " vs " + shape_str(test));
  if (train.rows() == 0) throw Error(ErrorKind::ShapeMismatch, "empty train matrix");
  NormStats stats;
  stats.mean = train.colwise().mean();
  Matrix centered = train.rowwise() - stats.mean;
  stats.std = (centered.colwise().squaredNorm() / static_cast<double>(train.rows()))
                  .cwiseSqrt()
                  .cwiseMax(1e-8);
  Normalized out;
  out.train = centered.array().rowwise() / stats.std.array();
  out.test = (test.rowwise() - stats.mean).array().rowwise() / stats.std.array();
  out.stats = std::move(stats);
  return out;
}

// ---------------------------------------------------------------------------
// Config files: flat `key = value`, `#` comments, lists as `[a, b, c]`.

inline RunConfig parse_config_text(std::string_view text) {
  RunConfig c;
  std::size_t line_no = 0;
  for (auto raw : detail::split(text, '\n')) {
    ++line_no;
    auto hash = raw.find('#');
    auto line = detail::trim(raw.substr(0, hash));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::InvariantViolation, "line " + std::to_string(line_no) + ": expected key=value");
    const std::string key(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    auto bad = [&] { throw Error(ErrorKind::InvariantViolation, key); };

    auto as_int = [&](int& dst) {
      auto v = detail::parse_int<int>(value);
      if (!v) bad();
      dst = *v;
    };
    auto as_double = [&](double& dst) {
      auto v = detail::parse_double(value);
      if (!v) bad();
      dst = *v;
    };
    auto as_bool = [&](bool& dst) {
      if (value == "true" || value == "1") dst = true;
      else if (value == "false" || value == "0") dst = false;
      else bad();
    };
    auto as_activation = [&](Activation& dst) {
      auto a = parse_activation(value);
      if (!a) bad();
      dst = *a;
    };

    if (key == "patch_sizes") {
      if (value.size() < 2 || value.front() != '[' || value.back() != ']') bad();
      c.patch_sizes.clear();
      auto inner = detail::trim(value.substr(1, value.size() - 2));
      if (!inner.empty()) {
        for (auto item : detail::split(inner, ',')) {
          auto v = detail::parse_int<int>(item);
          if (!v) bad();
          c.patch_sizes.push_back(*v);
        }
      }
    } else if (key == "d_ft") as_int(c.d_ft);
    else if (key == "g_ft") as_int(c.g_ft);
    else if (key == "c_ft") as_int(c.c_ft);
    else if (key == "d_enh") as_int(c.d_enh);
    else if (key == "g_enh") as_int(c.g_enh);
    else if (key == "c_enh") as_int(c.c_enh);
    else if (key == "shrink_s") as_double(c.shrink_s);
    else if (key == "ridge_r") as_double(c.ridge_r);
    else if (key == "d_k") as_int(c.d_k);
    else if (key == "sigma") as_double(c.sigma);
    else if (key == "feature_activation") as_activation(c.feature_activation);
    else if (key == "enh_activation") as_activation(c.enh_activation);
    else if (key == "sae_enabled") as_bool(c.sae_enabled);
    else if (key == "sae_lambda") as_double(c.sae_lambda);
    else if (key == "sae_iters") as_int(c.sae_iters);
    else if (key == "anomaly_ratio") as_double(c.anomaly_ratio);
    else if (key == "master_seed") {
      auto v = detail::parse_int<std::uint64_t>(value);
      if (!v) bad();
      c.master_seed = *v;
    } else if (key == "exec_mode") {
      auto m = parse_exec_mode(value);
      if (!m) bad();
      c.exec_mode = *m;
    } else if (key == "score_minmax") as_bool(c.score_minmax);
    else throw Error(ErrorKind::UnknownKey, key);
  }
  validate(c);
  return c;
}

inline RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

inline std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "patch_sizes = [";
  for (std::size_t i = 0; i < c.patch_sizes.size(); ++i) out << (i ? ", " : "") << c.patch_sizes[i];
  out << "]\n";
  out << "d_ft = " << c.d_ft << '\n'
      << "g_ft = " << c.g_ft << '\n'
      << "c_ft = " << c.c_ft << '\n'
      << "d_enh = " << c.d_enh << '\n'
      << "g_enh = " << c.g_enh << '\n'
      << "c_enh = " << c.c_enh << '\n'
      << "shrink_s = " << format_double(c.shrink_s) << '\n'
      << "ridge_r = " << format_double(c.ridge_r) << '\n'
      << "d_k = " << c.d_k << '\n'
      << "sigma = " << format_double(c.sigma) << '\n'
      << "feature_activation = " << to_string(c.feature_activation) << '\n'
      << "enh_activation = " << to_string(c.enh_activation) << '\n'
      << "sae_enabled = " << (c.sae_enabled ? "true" : "false") << '\n'
      << "sae_lambda = " << format_double(c.sae_lambda) << '\n'
      << "sae_iters = " << c.sae_iters << '\n'
      << "anomaly_ratio = " << format_double(c.anomaly_ratio) << '\n'
      << "master_seed = " << c.master_seed << '\n'
      << "exec_mode = " << to_string(c.exec_mode) << '\n'
      << "score_minmax = " << (c.score_minmax ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace cpatchbls

#endif  // CPATCHBLS_DATAIO_HPP
