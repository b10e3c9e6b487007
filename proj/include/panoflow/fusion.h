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

#ifndef PANOFLOW_FUSION_H_
#define PANOFLOW_FUSION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "panoflow/detection.h"
#include "panoflow/heads.h"
#include "panoflow/panoptic.h"
#include "panoflow/tensor.h"

namespace panoflow {

struct BinaryMask {
  int64_t height = 0;
  int64_t width = 0;
  std::vector<uint8_t> bits;  // 0 or 1, row-major

  BinaryMask() = default;
  BinaryMask(int64_t h, int64_t w) : height(h), width(w), bits(static_cast<size_t>(h * w), 0) {}
  int64_t Count() const;
};

struct InstanceMask {
  int category_id = 0;
  float score = 0;
  BinaryMask mask;
  // Index of the detection this mask came from; -1 when unknown.
  int64_t detection_index = -1;
};

struct FusionConfig {
  double score_thresh = 0.37;
  double overlap_thresh = 0.37;
  int64_t stuff_area_limit = 4900;
  double box_fill_overlap = 0.6;
  // Stuff channel treated as 'other' and never labelled; -1 for none.
  int other_class_id = -1;
  // Category id per stuff channel (the entry at other_class_id is ignored).
  std::vector<int> stuff_category_ids;

  void Validate() const;
};

// Resizes the 28x28 mask bilinearly to the box's pixel extent
// [floor(x1), ceil(x2)) x [floor(y1), ceil(y2)), thresholds at >= 0.5 and
// places it into an image-sized raster, dropping pixels outside the image.
InstanceMask PasteMask(const RoiMask& roi, int64_t image_h, int64_t image_w);

struct FusionInputs {
  int64_t height = 0;
  int64_t width = 0;
  std::vector<InstanceMask> instances;
  std::optional<Tensor> stuff_probs;  // (1, channels, height, width)
  std::vector<Detection> detections;
};

// Greedy merge:
//  (a) instances scoring >= score_thresh, best first, claim free pixels unless
//      more than overlap_thresh of their own mask is already taken;
//  (b) per stuff class (argmax, ties to the lower channel, 'other' skipped),
//      unassigned pixels form a segment when they number >= stuff_area_limit;
//  (c) detections scoring >= score_thresh that did not yield a surviving
//      instance fill box & unassigned when that covers >= box_fill_overlap of
//      the box.
// Segment ids run from 1 in creation order; everything else stays void.
PanopticMap Fuse(const FusionInputs& inputs, const FusionConfig& config);

struct RgbImage {
  int64_t height = 0;
  int64_t width = 0;
  std::vector<uint8_t> rgb;  // interleaved, row-major
};

// Per-id colours from a seeded hash; void is black and distinct ids never
// share a colour (collisions are resolved by probing).
RgbImage Colorize(const PanopticMap& map, uint64_t palette_seed);

}  // namespace panoflow

#endif  // PANOFLOW_FUSION_H_
