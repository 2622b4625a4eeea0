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

#ifndef CPATCHBLS_MODEL_IO_HPP
#define CPATCHBLS_MODEL_IO_HPP

// Binary model dump, for reproducibility audits.
//
//   bytes 0..7    magic "CPBLSMD1"
//   bytes 8..15   manifest length in bytes (uint64, little-endian)
//   manifest      UTF-8 JSON
//   payload       float64 little-endian, arrays back to back
//
// Every manifest "arrays" entry is {name, rows, cols, offset}; offset counts
// float64 values from the start of the payload and data is row-major.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpatchbls/blscore.hpp"

namespace cpatchbls {

namespace detail {

inline constexpr char kDumpMagic[8] = {'C', 'P', 'B', 'L', 'S', 'M', 'D', '1'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

class DumpWriter {
 public:
  void add(const std::string& name, const Matrix& m) {
    arrays_.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"offset", payload_.size()}});
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) payload_.push_back(m(r, c));
  }
  void add(const std::string& name, const RowVector& v) { add(name, Matrix(v)); }

  nlohmann::ordered_json arrays() const { return arrays_; }
  const std::vector<double>& payload() const { return payload_; }

 private:
  nlohmann::ordered_json arrays_ = nlohmann::ordered_json::array();
  std::vector<double> payload_;
};

class DumpReader {
 public:
  DumpReader(const nlohmann::ordered_json& arrays, std::vector<double> payload)
      : payload_(std::move(payload)) {
    for (const auto& a : arrays) index_[a["name"].get<std::string>()] = a;
  }

  Matrix matrix(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error(ErrorKind::ShapeMismatch, "dump lacks array " + name);
    const auto rows = it->second["rows"].get<Eigen::Index>();
    const auto cols = it->second["cols"].get<Eigen::Index>();
    const auto offset = it->second["offset"].get<std::size_t>();
    if (offset + static_cast<std::size_t>(rows * cols) > payload_.size())
      throw Error(ErrorKind::ShapeMismatch, "dump array " + name + " out of range");
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        m(r, c) = payload_[offset + static_cast<std::size_t>(r * cols + c)];
    return m;
  }
  RowVector row(const std::string& name) const { return matrix(name).row(0); }

 private:
  std::map<std::string, nlohmann::ordered_json> index_;
  std::vector<double> payload_;
};

inline void dump_bank(DumpWriter& w, const std::string& prefix, const NodeBank& bank) {
  for (std::size_t g = 0; g < bank.layers.size(); ++g)
    for (std::size_t k = 0; k < bank.layers[g].size(); ++k) {
      const auto base = prefix + "/" + std::to_string(g) + "/" + std::to_string(k);
      w.add(base + "/weight", bank.layers[g][k].weight);
      w.add(base + "/bias", bank.layers[g][k].bias);
    }
}

inline NodeBank load_bank(const DumpReader& r, const std::string& prefix, int groups, int cascades,
                          Activation act) {
  NodeBank bank;
  bank.activation = act;
  bank.layers.resize(static_cast<std::size_t>(groups));
  for (int g = 0; g < groups; ++g)
    for (int k = 0; k < cascades; ++k) {
      const auto base = prefix + "/" + std::to_string(g) + "/" + std::to_string(k);
      bank.layers[static_cast<std::size_t>(g)].push_back({r.matrix(base + "/weight"), r.row(base + "/bias")});
    }
  return bank;
}

}  // namespace detail

inline void save_model(const std::filesystem::path& path, const PatchBlsModel& model) {
  detail::DumpWriter w;
  detail::dump_bank(w, "feature", model.feature);
  if (model.rff) {
    for (std::size_t g = 0; g < model.rff->size(); ++g)
      for (std::size_t k = 0; k < (*model.rff)[g].size(); ++k) {
        const auto base = "rff/" + std::to_string(g) + "/" + std::to_string(k);
        w.add(base + "/omega", (*model.rff)[g][k].omega);
        w.add(base + "/b", (*model.rff)[g][k].b);
      }
  }
  detail::dump_bank(w, "enhancement", model.enhancement);
  w.add("head/w_o", model.head.w_o);

  nlohmann::ordered_json manifest;
  manifest["format"] = "cpatchbls-model";
  manifest["version"] = 1;
  manifest["branch"] = model.branch == BranchKind::Basic ? "Basic" : "SKP";
  manifest["patch_size"] = model.patch_size;
  manifest["feature"] = {{"groups", model.feature.groups()},
                         {"cascades", model.feature.cascades()},
                         {"activation", std::string(to_string(model.feature.activation))}};
  manifest["enhancement"] = {{"groups", model.enhancement.groups()},
                             {"cascades", model.enhancement.cascades()},
                             {"activation", std::string(to_string(model.enhancement.activation))},
                             {"scales", model.enhancement_scales}};
  if (model.rff) {
    const auto& first = model.rff->front().front();
    manifest["rff"] = {{"sigma", first.sigma}, {"d_k", first.d_k}};
  }
  manifest["lambda"] = model.head.lambda;
  manifest["arrays"] = w.arrays();

  const std::string text = manifest.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoFailure, path.string());
  out.write(detail::kDumpMagic, sizeof(detail::kDumpMagic));
  const auto len = detail::to_little<std::uint64_t>(text.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double v : w.payload()) {
    const double le = detail::to_little(v);
    out.write(reinterpret_cast<const char*>(&le), sizeof(le));
  }
  if (!out) throw Error(ErrorKind::IoFailure, path.string());
}

inline PatchBlsModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  char magic[8];
  std::uint64_t len = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || std::memcmp(magic, detail::kDumpMagic, sizeof(magic)) != 0)
    throw Error(ErrorKind::IoFailure, "not a model dump: " + path.string());
  len = detail::to_little(len);
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  std::vector<double> payload;
  double v = 0.0;
  while (in.read(reinterpret_cast<char*>(&v), sizeof(v))) payload.push_back(detail::to_little(v));

  const auto manifest = nlohmann::ordered_json::parse(text);
  const detail::DumpReader r(manifest["arrays"], std::move(payload));
  auto activation = [](const nlohmann::ordered_json& j) {
    auto a = parse_activation(j.get<std::string>());
    if (!a) throw Error(ErrorKind::IoFailure, "bad activation in dump");
    return *a;
  };

  PatchBlsModel model;
  model.branch = manifest["branch"] == "SKP" ? BranchKind::SKP : BranchKind::Basic;
  model.patch_size = manifest["patch_size"].get<int>();
  const auto& f = manifest["feature"];
  const auto& e = manifest["enhancement"];
  model.feature = detail::load_bank(r, "feature", f["groups"].get<int>(), f["cascades"].get<int>(),
                                    activation(f["activation"]));
  model.enhancement = detail::load_bank(r, "enhancement", e["groups"].get<int>(), e["cascades"].get<int>(),
                                        activation(e["activation"]));
  model.enhancement_scales = e["scales"].get<LayerScales>();
  if (manifest.contains("rff")) {
    RffMaps maps(static_cast<std::size_t>(f["groups"].get<int>()));
    for (std::size_t g = 0; g < maps.size(); ++g)
      for (int k = 0; k < f["cascades"].get<int>(); ++k) {
        const auto base = "rff/" + std::to_string(g) + "/" + std::to_string(k);
        RffMap m;
        m.omega = r.matrix(base + "/omega");
        m.b = r.row(base + "/b");
        m.sigma = manifest["rff"]["sigma"].get<double>();
        m.d_k = manifest["rff"]["d_k"].get<int>();
        maps[g].push_back(std::move(m));
      }
    model.rff = std::move(maps);
  }
  model.head.w_o = r.matrix("head/w_o");
  model.head.lambda = manifest["lambda"].get<double>();
  return model;
}

}  // namespace cpatchbls

#endif  // CPATCHBLS_MODEL_IO_HPP
