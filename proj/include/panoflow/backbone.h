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

#ifndef PANOFLOW_BACKBONE_H_
#define PANOFLOW_BACKBONE_H_

#include <map>
#include <vector>

#include "panoflow/tensor.h"
#include "panoflow/weights.h"

namespace panoflow {

inline constexpr int kPyramidChannels = 256;
inline constexpr int kMinLevel = 3;
inline constexpr int kMaxLevel = 7;

// FPN outputs P3..P7; level i has stride 2^i.
struct FeaturePyramid {
  std::map<int, Tensor> levels;

  // Throws kInvalidArgument when the level is absent.
  const Tensor& level(int index) const;
};

enum class PyramidTask { kDetection, kSegmentation };

// Detection reads all five levels; thing and stuff segmentation read P3..P5.
std::vector<int> SelectLevels(const FeaturePyramid& pyramid, PyramidTask task);

// Toy eight-layer stem (3x3 conv + ReLU each):
//   backbone.stem1  3 -> 32   stride 2
//   backbone.stem2  32 -> 32  stride 1
//   backbone.stem3  32 -> 64  stride 2
//   backbone.stem4  64 -> 64  stride 1
//   backbone.stem5  64 -> 128 stride 2
//   backbone.stem6  128 -> 128 stride 1   => C3 (1/8)
//   backbone.stem7  128 -> 256 stride 2   => C4 (1/16)
//   backbone.stem8  256 -> 512 stride 2   => C5 (1/32)
// followed by FPN: fpn.lateral{3,4,5} (1x1), nearest 2x top-down merge,
// fpn.output{3,4,5} (3x3), fpn.p6 (3x3 s2 on P5), fpn.p7 (3x3 s2 on relu(P6)).
std::vector<WeightSpec> BackboneWeightSpecs(int channels = kPyramidChannels);

// Image must be (b, 3, H, W) with H and W divisible by 128.
FeaturePyramid BuildPyramid(const Tensor& image, const WeightStore& weights);

}  // namespace panoflow

#endif  // PANOFLOW_BACKBONE_H_
