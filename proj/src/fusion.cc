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

#include "panoflow/fusion.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

#include "panoflow/error.h"
#include "panoflow/rng.h"

namespace panoflow {

int64_t BinaryMask::Count() const {
  return std::count(bits.begin(), bits.end(), uint8_t{1});
}

void FusionConfig::Validate() const {
  Require(score_thresh >= 0.0 && score_thresh <= 1.0 && overlap_thresh >= 0.0 &&
              overlap_thresh <= 1.0 && box_fill_overlap >= 0.0 && box_fill_overlap <= 1.0,
          ErrorCode::kConfig, "fusion thresholds must lie in [0, 1]");
  Require(stuff_area_limit >= 0, ErrorCode::kConfig, "stuff_area_limit must be >= 0");
}

InstanceMask PasteMask(const RoiMask& roi, int64_t image_h, int64_t image_w) {
  InstanceMask out;
  out.category_id = roi.category_id;
  out.score = roi.score;
  out.detection_index = static_cast<int64_t>(roi.detection_index);
  out.mask = BinaryMask(image_h, image_w);

  const int64_t x0 = static_cast<int64_t>(std::floor(roi.box.x1));
  const int64_t y0 = static_cast<int64_t>(std::floor(roi.box.y1));
  const int64_t x1 = static_cast<int64_t>(std::ceil(roi.box.x2));
  const int64_t y1 = static_cast<int64_t>(std::ceil(roi.box.y2));
  const int64_t bw = x1 - x0;
  const int64_t bh = y1 - y0;
  if (bw < 1 || bh < 1 || x1 <= 0 || y1 <= 0 || x0 >= image_w || y0 >= image_h) return out;

  const Tensor small(Shape{1, 1, kMaskSize, kMaskSize},
                     std::vector<float>(roi.mask.begin(), roi.mask.end()));
  const Tensor resized = BilinearResize(small, bh, bw);
  for (int64_t y = std::max<int64_t>(y0, 0); y < std::min(y1, image_h); ++y) {
    for (int64_t x = std::max<int64_t>(x0, 0); x < std::min(x1, image_w); ++x) {
      if (resized.at(0, 0, y - y0, x - x0) >= 0.5f) {
        out.mask.bits[static_cast<size_t>(y * image_w + x)] = 1;
      }
    }
  }
  return out;
}

namespace {

std::vector<size_t> ScoreOrder(size_t count, auto score_of) {
  std::vector<size_t> order(count);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return score_of(a) > score_of(b); });
  return order;
}

}  // namespace

PanopticMap Fuse(const FusionInputs& inputs, const FusionConfig& config) {
  config.Validate();
  const int64_t h = inputs.height;
  const int64_t w = inputs.width;
  Require(h >= 1 && w >= 1, ErrorCode::kShapeMismatch, "fuse: image dims must be >= 1");
  for (const InstanceMask& inst : inputs.instances) {
    if (inst.mask.height != h || inst.mask.width != w) {
      Fail(ErrorCode::kShapeMismatch,
           "fuse: instance mask " + std::to_string(inst.mask.height) + "x" +
               std::to_string(inst.mask.width) + " does not match image " + std::to_string(h) +
               "x" + std::to_string(w));
    }
  }
  if (inputs.stuff_probs) {
    const Shape& s = inputs.stuff_probs->shape();
    if (s.batch != 1 || s.height != h || s.width != w) {
      Fail(ErrorCode::kShapeMismatch, "fuse: stuff probabilities " + s.ToString() +
                                          " do not match image " + std::to_string(h) + "x" +
                                          std::to_string(w));
    }
  }

  PanopticMap map(h, w);
  uint32_t next_id = 1;
  std::unordered_set<int64_t> represented;

  // (a) instances.
  const auto& instances = inputs.instances;
  for (size_t idx : ScoreOrder(instances.size(), [&](size_t i) { return instances[i].score; })) {
    const InstanceMask& inst = instances[idx];
    if (inst.score < config.score_thresh) continue;
    int64_t area = 0;
    int64_t taken = 0;
    for (size_t p = 0; p < map.ids.size(); ++p) {
      if (!inst.mask.bits[p]) continue;
      ++area;
      if (map.ids[p] != 0) ++taken;
    }
    if (area == 0 || taken == area) continue;
    if (static_cast<double>(taken) / static_cast<double>(area) > config.overlap_thresh) continue;
    const uint32_t id = next_id++;
    for (size_t p = 0; p < map.ids.size(); ++p) {
      if (inst.mask.bits[p] && map.ids[p] == 0) map.ids[p] = id;
    }
    map.segments.push_back({id, inst.category_id, true, area - taken, false, inst.score});
    if (inst.detection_index >= 0) represented.insert(inst.detection_index);
  }

  // (b) stuff.
  if (inputs.stuff_probs) {
    const Tensor& probs = *inputs.stuff_probs;
    const int64_t channels = probs.channels();
    Require(config.other_class_id < channels, ErrorCode::kConfig,
            "fuse: other_class_id exceeds stuff channel count");
    std::vector<int64_t> label(map.ids.size());
    for (int64_t p = 0; p < h * w; ++p) {
      int64_t best = 0;
      float best_value = probs.plane(0, 0)[p];
      for (int64_t c = 1; c < channels; ++c) {
        const float v = probs.plane(0, c)[p];
        if (v > best_value) {
          best_value = v;
          best = c;
        }
      }
      label[static_cast<size_t>(p)] = best;
    }
    for (int64_t c = 0; c < channels; ++c) {
      if (c == config.other_class_id) continue;
      int64_t area = 0;
      for (size_t p = 0; p < label.size(); ++p) {
        if (label[p] == c && map.ids[p] == 0) ++area;
      }
      if (area == 0 || area < config.stuff_area_limit) continue;
      Require(c < static_cast<int64_t>(config.stuff_category_ids.size()), ErrorCode::kConfig,
              "fuse: no category id configured for stuff channel " + std::to_string(c));
      const uint32_t id = next_id++;
      for (size_t p = 0; p < label.size(); ++p) {
        if (label[p] == c && map.ids[p] == 0) map.ids[p] = id;
      }
      map.segments.push_back(
          {id, config.stuff_category_ids[static_cast<size_t>(c)], false, area, false, {}});
    }
  }

  // (c) box fill.
  const auto& dets = inputs.detections;
  for (size_t idx : ScoreOrder(dets.size(), [&](size_t i) { return dets[i].score; })) {
    const Detection& d = dets[idx];
    if (d.score < config.score_thresh) continue;
    if (represented.count(static_cast<int64_t>(idx))) continue;
    const int64_t x0 = std::clamp<int64_t>(static_cast<int64_t>(std::floor(d.box.x1)), 0, w);
    const int64_t y0 = std::clamp<int64_t>(static_cast<int64_t>(std::floor(d.box.y1)), 0, h);
    const int64_t x1 = std::clamp<int64_t>(static_cast<int64_t>(std::ceil(d.box.x2)), 0, w);
    const int64_t y1 = std::clamp<int64_t>(static_cast<int64_t>(std::ceil(d.box.y2)), 0, h);
    const int64_t box_area = std::max<int64_t>(0, x1 - x0) * std::max<int64_t>(0, y1 - y0);
    if (box_area == 0) continue;
    int64_t free = 0;
    for (int64_t y = y0; y < y1; ++y) {
      for (int64_t x = x0; x < x1; ++x) free += map.ids[static_cast<size_t>(y * w + x)] == 0;
    }
    if (static_cast<double>(free) / static_cast<double>(box_area) < config.box_fill_overlap) {
      continue;
    }
    const uint32_t id = next_id++;
    for (int64_t y = y0; y < y1; ++y) {
      for (int64_t x = x0; x < x1; ++x) {
        uint32_t& px = map.ids[static_cast<size_t>(y * w + x)];
        if (px == 0) px = id;
      }
    }
    map.segments.push_back({id, d.category_id, true, free, false, d.score});
    represented.insert(static_cast<int64_t>(idx));
  }
  return map;
}

RgbImage Colorize(const PanopticMap& map, uint64_t palette_seed) {
  std::set<uint32_t> ids(map.ids.begin(), map.ids.end());
  ids.erase(0);
  std::map<uint32_t, uint32_t> color_of;
  std::unordered_set<uint32_t> used = {0};  // black is reserved for void
  for (uint32_t id : ids) {
    for (uint64_t probe = 0;; ++probe) {
      SplitMix64 rng(palette_seed ^ (static_cast<uint64_t>(id) << 20) ^ probe);
      const uint32_t color = static_cast<uint32_t>(rng.Next() & 0xFFFFFF);
      if (used.insert(color).second) {
        color_of[id] = color;
        break;
      }
    }
  }
  RgbImage out{map.height, map.width, std::vector<uint8_t>(map.ids.size() * 3, 0)};
  for (size_t p = 0; p < map.ids.size(); ++p) {
    if (map.ids[p] == 0) continue;
    const uint32_t color = color_of[map.ids[p]];
    out.rgb[3 * p] = static_cast<uint8_t>(color >> 16);
    out.rgb[3 * p + 1] = static_cast<uint8_t>(color >> 8);
    out.rgb[3 * p + 2] = static_cast<uint8_t>(color);
  }
  return out;
}

}  // namespace panoflow
