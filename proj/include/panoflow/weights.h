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

#ifndef PANOFLOW_WEIGHTS_H_
#define PANOFLOW_WEIGHTS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "panoflow/tensor.h"

namespace panoflow {

// One named parameter array. `dims` is what the checkpoint manifest records:
// four dims for convolution kernels, one for bias/affine vectors.
struct WeightEntry {
  std::vector<int64_t> dims;
  std::vector<float> values;
};

class WeightStore {
 public:
  void Set(const std::string& name, WeightEntry entry);
  bool Has(std::string_view name) const;

  // Throws ErrorCode::kMissingWeight naming the entry.
  const WeightEntry& Get(std::string_view name) const;

  // Reads "<prefix>.conv" (out, in, kh, kw) and "<prefix>.bias" (out).
  ConvParams Conv(std::string_view prefix) const;
  std::vector<float> Vector(std::string_view name) const;

  // Zeroes the named entry in place.
  void Zero(std::string_view name);

  const std::map<std::string, WeightEntry, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, WeightEntry, std::less<>> entries_;
};

enum class InitKind {
  kKaimingUniform,  // U(-b, b) with b = sqrt(6 / fan_in)
  kZeros,
  kOnes,
  kConstant,
};

struct WeightSpec {
  std::string name;
  std::vector<int64_t> dims;
  InitKind init = InitKind::kZeros;
  double value = 0.0;  // for kConstant
};

// Specs for a conv layer: "<prefix>.conv" and "<prefix>.bias".
void AppendConvSpecs(std::vector<WeightSpec>& specs, const std::string& prefix, int64_t out_ch,
                     int64_t in_ch, int64_t kernel, double bias_value = 0.0);

// Deterministic initialisation; each entry draws from its own splitmix64
// stream keyed by (seed, name), so adding entries never shifts others.
WeightStore InitWeights(const std::vector<WeightSpec>& specs, uint64_t seed);

// Checkpoint = JSON manifest [{name, dims, byte_offset}] plus a sibling
// ".bin" blob of little-endian float32 values (manifest path with its
// extension replaced).
void SaveCheckpoint(const WeightStore& store, const std::filesystem::path& manifest_path);
WeightStore LoadCheckpoint(const std::filesystem::path& manifest_path);
std::filesystem::path CheckpointBlobPath(const std::filesystem::path& manifest_path);

}  // namespace panoflow

#endif  // PANOFLOW_WEIGHTS_H_
