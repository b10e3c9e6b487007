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

#include "panoflow/detection.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "panoflow/error.h"
#include "panoflow/tensor_io.h"

namespace panoflow {

double Box::Area() const {
  return std::max(0.0, static_cast<double>(x2) - x1) * std::max(0.0, static_cast<double>(y2) - y1);
}

double IoU(const Box& a, const Box& b) {
  const double iw = std::min<double>(a.x2, b.x2) - std::max<double>(a.x1, b.x1);
  const double ih = std::min<double>(a.y2, b.y2) - std::max<double>(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.Area() + b.Area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<Box> GenerateAnchors(int level, int64_t height, int64_t width) {
  Require(level >= 3 && level <= 7, ErrorCode::kInvalidArgument,
          "generate_anchors: level must be in 3..7");
  const double stride = std::ldexp(1.0, level);
  const double base = 4.0 * stride;
  const double ratios[] = {0.5, 1.0, 2.0};
  std::vector<Box> templates;
  for (int s = 0; s < 3; ++s) {
    const double size = base * std::exp2(s / 3.0);
    for (double ratio : ratios) {
      const double w = size / std::sqrt(ratio);
      const double h = size * std::sqrt(ratio);
      templates.push_back({static_cast<float>(-w / 2), static_cast<float>(-h / 2),
                           static_cast<float>(w / 2), static_cast<float>(h / 2)});
    }
  }
  std::vector<Box> anchors;
  anchors.reserve(static_cast<size_t>(height * width) * templates.size());
  for (int64_t y = 0; y < height; ++y) {
    for (int64_t x = 0; x < width; ++x) {
      const float cx = static_cast<float>((x + 0.5) * stride);
      const float cy = static_cast<float>((y + 0.5) * stride);
      for (const Box& t : templates) anchors.push_back({cx + t.x1, cy + t.y1, cx + t.x2, cy + t.y2});
    }
  }
  return anchors;
}

std::vector<Box> DecodeBoxes(std::span<const Box> anchors, std::span<const float> deltas,
                             int64_t image_h, int64_t image_w) {
  Require(deltas.size() == 4 * anchors.size(), ErrorCode::kShapeMismatch,
          "decode_boxes: expected " + std::to_string(4 * anchors.size()) + " deltas, got " +
              std::to_string(deltas.size()));
  std::vector<Box> boxes(anchors.size());
  const double max_x = static_cast<double>(image_w);
  const double max_y = static_cast<double>(image_h);
  for (size_t i = 0; i < anchors.size(); ++i) {
    const float* d = deltas.data() + 4 * i;
    Require(!std::isnan(d[0]) && !std::isnan(d[1]) && !std::isnan(d[2]) && !std::isnan(d[3]),
            ErrorCode::kInvalidArgument, "decode_boxes: NaN delta at anchor " + std::to_string(i));
    const Box& a = anchors[i];
    const double aw = static_cast<double>(a.x2) - a.x1;
    const double ah = static_cast<double>(a.y2) - a.y1;
    const double cx = a.x1 + 0.5 * aw + d[0] * aw;
    const double cy = a.y1 + 0.5 * ah + d[1] * ah;
    const double w = aw * std::exp(std::min<double>(d[2], kMaxLogScale));
    const double h = ah * std::exp(std::min<double>(d[3], kMaxLogScale));
    boxes[i] = {static_cast<float>(std::clamp(cx - 0.5 * w, 0.0, max_x)),
                static_cast<float>(std::clamp(cy - 0.5 * h, 0.0, max_y)),
                static_cast<float>(std::clamp(cx + 0.5 * w, 0.0, max_x)),
                static_cast<float>(std::clamp(cy + 0.5 * h, 0.0, max_y))};
  }
  return boxes;
}

std::vector<Detection> NmsPerClass(std::span<const Detection> detections, double iou_threshold,
                                   size_t keep_top) {
  std::vector<size_t> order(detections.size());
  std::iota(order.begin(), order.end(), size_t{0});
  auto by_score = [&](size_t a, size_t b) {
    if (detections[a].score != detections[b].score) return detections[a].score > detections[b].score;
    return a < b;
  };
  std::stable_sort(order.begin(), order.end(), by_score);

  std::map<int, std::vector<size_t>> kept_by_class;
  std::vector<size_t> kept;
  for (size_t idx : order) {
    std::vector<size_t>& same = kept_by_class[detections[idx].category_id];
    const bool suppressed = std::any_of(same.begin(), same.end(), [&](size_t k) {
      return IoU(detections[k].box, detections[idx].box) > iou_threshold;
    });
    if (suppressed) continue;
    same.push_back(idx);
    kept.push_back(idx);
  }
  // `kept` inherits the global score order, so truncation takes the top.
  if (kept.size() > keep_top) kept.resize(keep_top);
  std::vector<Detection> out;
  out.reserve(kept.size());
  for (size_t idx : kept) out.push_back(detections[idx]);
  return out;
}

std::vector<Detection> DecodeDetections(const std::map<int, Tensor>& cls_logits,
                                        const std::map<int, Tensor>& box_deltas,
                                        int num_classes, const DetectionConfig& config,
                                        int64_t image_h, int64_t image_w) {
  std::vector<Detection> candidates;
  for (const auto& [level, logits] : cls_logits) {
    auto it = box_deltas.find(level);
    Require(it != box_deltas.end(), ErrorCode::kInvalidArgument,
            "decode: box deltas missing for level " + std::to_string(level));
    const Tensor& deltas = it->second;
    const int64_t h = logits.height();
    const int64_t w = logits.width();
    Require(logits.batch() == 1 && logits.channels() == kAnchorsPerLocation * num_classes &&
                deltas.channels() == kAnchorsPerLocation * 4 && deltas.height() == h &&
                deltas.width() == w,
            ErrorCode::kShapeMismatch, "decode: unexpected head output shapes at level " +
                                           std::to_string(level));
    const std::vector<Box> anchors = GenerateAnchors(level, h, w);

    struct Candidate {
      float score;
      size_t anchor;
      int cls;
    };
    std::vector<Candidate> level_candidates;
    for (int64_t y = 0; y < h; ++y) {
      for (int64_t x = 0; x < w; ++x) {
        for (int a = 0; a < kAnchorsPerLocation; ++a) {
          const size_t anchor = static_cast<size_t>((y * w + x) * kAnchorsPerLocation + a);
          for (int k = 0; k < num_classes; ++k) {
            const double logit = logits.at(0, a * num_classes + k, y, x);
            const float score = static_cast<float>(1.0 / (1.0 + std::exp(-logit)));
            if (score > config.score_thresh) level_candidates.push_back({score, anchor, k});
          }
        }
      }
    }
    std::stable_sort(level_candidates.begin(), level_candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    if (level_candidates.size() > static_cast<size_t>(config.pre_nms_top_n)) {
      level_candidates.resize(static_cast<size_t>(config.pre_nms_top_n));
    }
    for (const Candidate& c : level_candidates) {
      const int64_t loc = static_cast<int64_t>(c.anchor) / kAnchorsPerLocation;
      const int a = static_cast<int>(c.anchor % kAnchorsPerLocation);
      const int64_t y = loc / w;
      const int64_t x = loc % w;
      const float d[4] = {deltas.at(0, a * 4 + 0, y, x), deltas.at(0, a * 4 + 1, y, x),
                          deltas.at(0, a * 4 + 2, y, x), deltas.at(0, a * 4 + 3, y, x)};
      const Box box = DecodeBoxes(std::span(&anchors[c.anchor], 1), d, image_h, image_w)[0];
      if (box.Width() <= 0.0f || box.Height() <= 0.0f) continue;
      candidates.push_back({box, c.cls + 1, c.score});
    }
  }
  return NmsPerClass(candidates, config.nms_thresh, static_cast<size_t>(config.top_k));
}

std::string DetectionsToJson(std::span<const DetectionRecord> records) {
  nlohmann::json out = nlohmann::json::array();
  for (const DetectionRecord& r : records) {
    const Box& b = r.detection.box;
    nlohmann::json item = {{"bbox", {b.x1, b.y1, b.x2, b.y2}},
                           {"category_id", r.detection.category_id},
                           {"score", r.detection.score}};
    if (r.mask_index) item["mask_index"] = *r.mask_index;
    out.push_back(std::move(item));
  }
  return out.dump(1);
}

std::vector<DetectionRecord> DetectionsFromJson(const std::string& text) {
  std::vector<DetectionRecord> records;
  try {
    const nlohmann::json doc = nlohmann::json::parse(text);
    Require(doc.is_array(), ErrorCode::kSchema, "detections JSON must be an array");
    for (size_t i = 0; i < doc.size(); ++i) {
      const nlohmann::json& item = doc[i];
      const auto bbox = item.at("bbox").get<std::vector<float>>();
      Require(bbox.size() == 4, ErrorCode::kSchema,
              "detection " + std::to_string(i) + ": bbox must have 4 numbers");
      DetectionRecord r;
      r.detection.box = {bbox[0], bbox[1], bbox[2], bbox[3]};
      r.detection.category_id = item.at("category_id").get<int>();
      r.detection.score = item.at("score").get<float>();
      Require(r.detection.score >= 0.0f && r.detection.score <= 1.0f, ErrorCode::kSchema,
              "detection " + std::to_string(i) + ": score outside [0, 1]");
      if (item.contains("mask_index")) r.mask_index = item.at("mask_index").get<int64_t>();
      records.push_back(r);
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchema, std::string("detections JSON: ") + e.what());
  }
  return records;
}

std::vector<DetectionRecord> ReadDetections(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  return DetectionsFromJson(std::string(bytes.begin(), bytes.end()));
}

}  // namespace panoflow
