// Copyright 2026 The PanoFlow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "panoflow/weights.h"

#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "panoflow/error.h"
#include "panoflow/rng.h"
#include "panoflow/tensor_io.h"

namespace panoflow {

namespace {

int64_t Product(const std::vector<int64_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), int64_t{1}, std::multiplies<>());
}

}  // namespace

void WeightStore::Set(const std::string& name, WeightEntry entry) {
  Require(static_cast<int64_t>(entry.values.size()) == Product(entry.dims),
          ErrorCode::kShapeMismatch, "weight '" + name + "' value count does not match dims");
  entries_.insert_or_assign(name, std::move(entry));
}

bool WeightStore::Has(std::string_view name) const { return entries_.find(name) != entries_.end(); }

const WeightEntry& WeightStore::Get(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    Fail(ErrorCode::kMissingWeight, "missing weight entry '" + std::string(name) + "'");
  }
  return it->second;
}

ConvParams WeightStore::Conv(std::string_view prefix) const {
  const std::string base(prefix);
  const WeightEntry& w = Get(base + ".conv");
  const WeightEntry& b = Get(base + ".bias");
  Require(w.dims.size() == 4, ErrorCode::kShapeMismatch, "'" + base + ".conv' must be rank 4");
  Require(b.dims.size() == 1 && b.dims[0] == w.dims[0], ErrorCode::kShapeMismatch,
          "'" + base + ".bias' does not match output channels");
  return ConvParams{Tensor(Shape{w.dims[0], w.dims[1], w.dims[2], w.dims[3]}, w.values), b.values};
}

std::vector<float> WeightStore::Vector(std::string_view name) const { return Get(name).values; }

void WeightStore::Zero(std::string_view name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    Fail(ErrorCode::kMissingWeight, "missing weight entry '" + std::string(name) + "'");
  }
  std::fill(it->second.values.begin(), it->second.values.end(), 0.0f);
}

void AppendConvSpecs(std::vector<WeightSpec>& specs, const std::string& prefix, int64_t out_ch,
                     int64_t in_ch, int64_t kernel, double bias_value) {
  specs.push_back({prefix + ".conv", {out_ch, in_ch, kernel, kernel}, InitKind::kKaimingUniform});
  specs.push_back({prefix + ".bias", {out_ch},
                   bias_value == 0.0 ? InitKind::kZeros : InitKind::kConstant, bias_value});
}

WeightStore InitWeights(const std::vector<WeightSpec>& specs, uint64_t seed) {
  WeightStore store;
  for (const WeightSpec& spec : specs) {
    WeightEntry entry{spec.dims, std::vector<float>(static_cast<size_t>(Product(spec.dims)))};
    switch (spec.init) {
      case InitKind::kKaimingUniform: {
        const int64_t fan_in = spec.dims.size() == 4 ? spec.dims[1] * spec.dims[2] * spec.dims[3]
                                                     : spec.dims.back();
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        SplitMix64 rng(StreamSeed(seed, spec.name));
        for (float& v : entry.values) v = static_cast<float>(rng.Uniform(-bound, bound));
        break;
      }
      case InitKind::kZeros:
        break;
      case InitKind::kOnes:
        std::fill(entry.values.begin(), entry.values.end(), 1.0f);
        break;
      case InitKind::kConstant:
        std::fill(entry.values.begin(), entry.values.end(), static_cast<float>(spec.value));
        break;
    }
    store.Set(spec.name, std::move(entry));
  }
  return store;
}

std::filesystem::path CheckpointBlobPath(const std::filesystem::path& manifest_path) {
  std::filesystem::path blob = manifest_path;
  blob.replace_extension(".bin");
  return blob;
}

void SaveCheckpoint(const WeightStore& store, const std::filesystem::path& manifest_path) {
  nlohmann::json manifest = nlohmann::json::array();
  std::vector<uint8_t> blob;
  for (const auto& [name, entry] : store.entries()) {
    manifest.push_back({{"name", name}, {"dims", entry.dims}, {"byte_offset", blob.size()}});
    for (float f : entry.values) {
      const uint32_t bits = std::bit_cast<uint32_t>(f);
      for (int i = 0; i < 4; ++i) blob.push_back(static_cast<uint8_t>(bits >> (8 * i)));
    }
  }
  const std::string text = manifest.dump(1);
  WriteFileBytes(manifest_path, std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
  WriteFileBytes(CheckpointBlobPath(manifest_path), blob);
}

WeightStore LoadCheckpoint(const std::filesystem::path& manifest_path) {
  const std::vector<uint8_t> text = ReadFileBytes(manifest_path);
  const std::vector<uint8_t> blob = ReadFileBytes(CheckpointBlobPath(manifest_path));
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormat, manifest_path.string() + ": " + e.what());
  }
  Require(manifest.is_array(), ErrorCode::kFormat,
          manifest_path.string() + ": checkpoint manifest must be a JSON array");
  WeightStore store;
  for (const auto& item : manifest) {
    std::string name;
    std::vector<int64_t> dims;
    uint64_t offset = 0;
    try {
      name = item.at("name").get<std::string>();
      dims = item.at("dims").get<std::vector<int64_t>>();
      offset = item.at("byte_offset").get<uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCode::kFormat, manifest_path.string() + ": bad manifest entry: " + e.what());
    }
    uint64_t count = 1;
    for (int64_t d : dims) {
      Require(d >= 1 && static_cast<uint64_t>(d) <= blob.size() / 4 / count, ErrorCode::kFormat,
              "checkpoint entry '" + name + "' exceeds blob");
      count *= static_cast<uint64_t>(d);
    }
    Require(!dims.empty() && offset <= blob.size() && 4 * count <= blob.size() - offset,
            ErrorCode::kFormat, "checkpoint entry '" + name + "' exceeds blob");
    WeightEntry entry{dims, std::vector<float>(static_cast<size_t>(count))};
    for (uint64_t i = 0; i < count; ++i) {
      uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<uint32_t>(blob[offset + 4 * i + b]) << (8 * b);
      entry.values[static_cast<size_t>(i)] = std::bit_cast<float>(bits);
    }
    store.Set(name, std::move(entry));
  }
  return store;
}

}  // namespace panoflow
