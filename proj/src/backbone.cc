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

#include "panoflow/backbone.h"

#include <string>

#include "panoflow/error.h"

namespace panoflow {

namespace {

struct StemLayer {
  int in_ch;
  int out_ch;
  int stride;
};

constexpr StemLayer kStem[] = {
    {3, 32, 2},   {32, 32, 1},   {32, 64, 2},    {64, 64, 1},
    {64, 128, 2}, {128, 128, 1}, {128, 256, 2},  {256, 512, 2},
};
// Stem outputs feeding C3, C4, C5 (1-based layer index).
constexpr int kC3Layer = 6;
constexpr int kC4Layer = 7;
constexpr int kC5Layer = 8;

Tensor ConvRelu(const Tensor& x, const ConvParams& p, int stride) {
  return Activate(Conv2d(x, p, stride, p.kernel_h() / 2), Activation::kRelu);
}

}  // namespace

const Tensor& FeaturePyramid::level(int index) const {
  auto it = levels.find(index);
  Require(it != levels.end(), ErrorCode::kInvalidArgument,
          "pyramid level P" + std::to_string(index) + " is missing");
  return it->second;
}

std::vector<int> SelectLevels(const FeaturePyramid& pyramid, PyramidTask task) {
  const int last = task == PyramidTask::kDetection ? kMaxLevel : 5;
  std::vector<int> out;
  for (int i = kMinLevel; i <= last; ++i) {
    pyramid.level(i);
    out.push_back(i);
  }
  return out;
}

std::vector<WeightSpec> BackboneWeightSpecs(int channels) {
  std::vector<WeightSpec> specs;
  for (size_t i = 0; i < std::size(kStem); ++i) {
    AppendConvSpecs(specs, "backbone.stem" + std::to_string(i + 1), kStem[i].out_ch,
                    kStem[i].in_ch, 3);
  }
  const int lateral_in[] = {kStem[kC3Layer - 1].out_ch, kStem[kC4Layer - 1].out_ch,
                            kStem[kC5Layer - 1].out_ch};
  for (int level = 3; level <= 5; ++level) {
    AppendConvSpecs(specs, "fpn.lateral" + std::to_string(level), channels,
                    lateral_in[level - 3], 1);
    AppendConvSpecs(specs, "fpn.output" + std::to_string(level), channels, channels, 3);
  }
  AppendConvSpecs(specs, "fpn.p6", channels, channels, 3);
  AppendConvSpecs(specs, "fpn.p7", channels, channels, 3);
  return specs;
}

FeaturePyramid BuildPyramid(const Tensor& image, const WeightStore& weights) {
  const Shape& s = image.shape();
  Require(s.channels == 3, ErrorCode::kShapeMismatch,
          "build_pyramid: image must have 3 channels, got " + s.ToString());
  if (s.height % 128 != 0 || s.width % 128 != 0) {
    Fail(ErrorCode::kShapeMismatch, "build_pyramid: image " + std::to_string(s.height) + "x" +
                                        std::to_string(s.width) +
                                        " is not divisible by 128; pad the input to a multiple "
                                        "of 128 on each side");
  }

  Tensor x = image;
  Tensor c3, c4, c5;
  for (size_t i = 0; i < std::size(kStem); ++i) {
    x = ConvRelu(x, weights.Conv("backbone.stem" + std::to_string(i + 1)), kStem[i].stride);
    const int layer = static_cast<int>(i) + 1;
    if (layer == kC3Layer) c3 = x;
    if (layer == kC4Layer) c4 = x;
    if (layer == kC5Layer) c5 = x;
  }

  Tensor m5 = Conv2d(c5, weights.Conv("fpn.lateral5"), 1, 0);
  Tensor m4 = Conv2d(c4, weights.Conv("fpn.lateral4"), 1, 0);
  AddInPlace(m4, UpsampleNearest2x(m5));
  Tensor m3 = Conv2d(c3, weights.Conv("fpn.lateral3"), 1, 0);
  AddInPlace(m3, UpsampleNearest2x(m4));

  FeaturePyramid pyramid;
  pyramid.levels[3] = Conv2d(m3, weights.Conv("fpn.output3"), 1, 1);
  pyramid.levels[4] = Conv2d(m4, weights.Conv("fpn.output4"), 1, 1);
  pyramid.levels[5] = Conv2d(m5, weights.Conv("fpn.output5"), 1, 1);
  pyramid.levels[6] = Conv2d(pyramid.levels[5], weights.Conv("fpn.p6"), 2, 1);
  pyramid.levels[7] =
      Conv2d(Activate(pyramid.levels[6], Activation::kRelu), weights.Conv("fpn.p7"), 2, 1);
  return pyramid;
}

}  // namespace panoflow
