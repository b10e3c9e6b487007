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

#ifndef PANOFLOW_HEADS_H_
#define PANOFLOW_HEADS_H_

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "panoflow/detection.h"
#include "panoflow/subnets.h"
#include "panoflow/tensor.h"
#include "panoflow/weights.h"

namespace panoflow {

inline constexpr int kRoiSize = 14;
inline constexpr int kMaskSize = 28;

struct HeadConfig {
  int num_anchors = kAnchorsPerLocation;
  int num_thing_classes = 80;
  int num_stuff_classes = 53;  // the stuff head adds one 'other' channel
  int stuff_channels = 128;
  int gn_groups = 32;

  void Validate() const;
};

// Entries:
//   head.cls, head.reg                         3x3 on the final cls/reg stage
//   head.thing.conv{1..4}                      3x3 + ReLU on 14x14 RoI crops
//   head.thing.deconv                          2x2 stride-2 deconv + ReLU
//   head.thing.output                          1x1 to num_thing_classes
//   head.stuff.p{3,4,5}.block{b}.conv          3x3, then group norm
//   head.stuff.p{3,4,5}.block{b}.gn_gamma/gn_beta
//   head.stuff.output                          1x1 to num_stuff_classes + 1
// The cls bias starts at the focal-loss prior -log(99).
std::vector<WeightSpec> HeadWeightSpecs(const HeadConfig& config, int in_channels);

struct ClsRegOutputs {
  std::map<int, Tensor> cls_logits;  // (b, A*K, h, w)
  std::map<int, Tensor> box_deltas;  // (b, A*4, h, w)
};

ClsRegOutputs RunClsRegHeads(const SubnetFeatures& features, const HeadConfig& config,
                             const WeightStore& weights);

struct RoiMask {
  Box box;
  int category_id = 0;
  float score = 0;
  size_t detection_index = 0;
  std::array<float, kMaskSize * kMaskSize> mask{};  // row-major, values in [0, 1]
};

struct ThingHeadResult {
  std::vector<RoiMask> masks;
  std::vector<std::string> warnings;  // one per skipped detection
};

// floor(4 + log2(sqrt(area) / 224)) clamped to [3, 5].
int AssignRoiLevel(const Box& box);

// RoIAlign on batch item 0 of `feature` with half-pixel alignment: each of
// the out_size x out_size bins averages 2x2 bilinear samples. Box
// coordinates are image pixels, scaled by `spatial_scale`.
Tensor RoiAlign(const Tensor& feature, const Box& box, double spatial_scale, int out_size);

// Mask head over P3..P5 thing features. Category c selects output channel
// c - 1. Boxes under one pixel of area are skipped with a warning.
ThingHeadResult RunThingHead(const SubnetFeatures& features, std::span<const Detection> detections,
                             const HeadConfig& config, const WeightStore& weights);

// Stuff head: level 3/4/5 features go through 1/2/3 blocks of
// (3x3 conv, group norm, ReLU, 2x bilinear) to reach 1/4 scale, are summed,
// projected by a 1x1 conv to S+1 channels, upsampled 4x bilinearly and
// softmaxed over channels. Channel S is the 'other' class.
Tensor RunStuffHead(const SubnetFeatures& features, const HeadConfig& config,
                    const WeightStore& weights);

}  // namespace panoflow

#endif  // PANOFLOW_HEADS_H_
