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

#ifndef PANOFLOW_DETECTION_H_
#define PANOFLOW_DETECTION_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panoflow/tensor.h"

namespace panoflow {

// Corner box in image pixels.
struct Box {
  float x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  float Width() const { return x2 - x1; }
  float Height() const { return y2 - y1; }
  double Area() const;

  friend bool operator==(const Box&, const Box&) = default;
};

// Continuous-coordinate IoU; zero for disjoint or empty boxes.
double IoU(const Box& a, const Box& b);

struct Detection {
  Box box;
  int category_id = 0;
  float score = 0;
};

inline constexpr int kAnchorsPerLocation = 9;
inline constexpr float kMaxLogScale = 4.135f;  // log(1000 / 16)

// Nine anchors per location: sizes 4 * 2^level * {2^0, 2^(1/3), 2^(2/3)},
// aspect ratios (h/w) {0.5, 1, 2}. Locations in row-major order; within a
// location, scale-major then ratio. Location (x, y) is centred at
// ((x + 0.5) * stride, (y + 0.5) * stride) with stride 2^level.
std::vector<Box> GenerateAnchors(int level, int64_t height, int64_t width);

// `deltas` holds (dx, dy, dw, dh) per anchor. Centres move by dx * anchor
// width / dy * anchor height; sizes scale by exp(min(d, 4.135)). Results are
// clipped to [0, image_w] x [0, image_h].
std::vector<Box> DecodeBoxes(std::span<const Box> anchors, std::span<const float> deltas,
                             int64_t image_h, int64_t image_w);

// Greedy per-class NMS: scores descending (ties by input order), a box is
// suppressed when IoU > iou_threshold with a kept box of its class. The
// merged result is sorted by score (ties by input order) and truncated.
std::vector<Detection> NmsPerClass(std::span<const Detection> detections,
                                   double iou_threshold = 0.4, size_t keep_top = 100);

struct DetectionConfig {
  float score_thresh = 0.05f;
  double nms_thresh = 0.4;
  int top_k = 100;
  int pre_nms_top_n = 1000;  // candidates per level before NMS
};

// Turns per-level head outputs into detections. cls logits are laid out as
// channel a * num_classes + k, deltas as a * 4 + {dx, dy, dw, dh}. Thing
// class k becomes category id k + 1.
std::vector<Detection> DecodeDetections(const std::map<int, Tensor>& cls_logits,
                                        const std::map<int, Tensor>& box_deltas,
                                        int num_classes, const DetectionConfig& config,
                                        int64_t image_h, int64_t image_w);

// Detections JSON: [{"bbox": [x1, y1, x2, y2], "category_id": c, "score": s,
// "mask_index": m?}]. mask_index links a detection to the instance mask it
// produced (index into the instances tensor).
struct DetectionRecord {
  Detection detection;
  std::optional<int64_t> mask_index;
};

std::string DetectionsToJson(std::span<const DetectionRecord> records);
std::vector<DetectionRecord> DetectionsFromJson(const std::string& text);
std::vector<DetectionRecord> ReadDetections(const std::filesystem::path& path);

}  // namespace panoflow

#endif  // PANOFLOW_DETECTION_H_
