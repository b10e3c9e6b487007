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

// Brute-force panoptic matcher: one full raster scan per (gt, pred) pair.

#ifndef PANOFLOW_TESTS_ORACLES_PQ_REFERENCE_H_
#define PANOFLOW_TESTS_ORACLES_PQ_REFERENCE_H_

#include <cstdint>
#include <map>
#include <vector>

namespace oracle {

struct RefSegment {
  uint32_t id;
  int category;
  bool crowd;
};

struct RefMap {
  int64_t h = 0, w = 0;
  std::vector<uint32_t> ids;
  std::vector<RefSegment> segments;
};

struct RefStats {
  double iou_sum = 0.0;
  int64_t tp = 0, fp = 0, fn = 0;
};

inline int64_t CountWhere(const RefMap& gt, const RefMap& pred, bool use_gt, uint32_t gt_id,
                          bool use_pred, uint32_t pred_id) {
  int64_t n = 0;
  for (size_t p = 0; p < gt.ids.size(); ++p) {
    if (use_gt && gt.ids[p] != gt_id) continue;
    if (use_pred && pred.ids[p] != pred_id) continue;
    ++n;
  }
  return n;
}

inline std::map<int, RefStats> Match(const RefMap& gt, const RefMap& pred) {
  std::map<int, RefStats> out;
  std::vector<bool> gt_matched(gt.segments.size(), false);
  std::vector<bool> pred_matched(pred.segments.size(), false);
  for (size_t g = 0; g < gt.segments.size(); ++g) {
    const RefSegment& gs = gt.segments[g];
    if (gs.crowd) continue;
    const int64_t gt_area = CountWhere(gt, pred, true, gs.id, false, 0);
    for (size_t q = 0; q < pred.segments.size(); ++q) {
      const RefSegment& ps = pred.segments[q];
      if (ps.category != gs.category) continue;
      const int64_t inter = CountWhere(gt, pred, true, gs.id, true, ps.id);
      if (inter == 0) continue;
      const int64_t pred_area = CountWhere(gt, pred, false, 0, true, ps.id);
      const int64_t pred_void = CountWhere(gt, pred, true, 0, true, ps.id);
      const int64_t uni = pred_area + gt_area - inter - pred_void;
      const double iou = static_cast<double>(inter) / static_cast<double>(uni);
      if (iou > 0.5) {
        out[gs.category].tp += 1;
        out[gs.category].iou_sum += iou;
        gt_matched[g] = true;
        pred_matched[q] = true;
      }
    }
  }
  for (size_t g = 0; g < gt.segments.size(); ++g) {
    if (!gt.segments[g].crowd && !gt_matched[g]) out[gt.segments[g].category].fn += 1;
  }
  for (size_t q = 0; q < pred.segments.size(); ++q) {
    if (pred_matched[q]) continue;
    const RefSegment& ps = pred.segments[q];
    const int64_t pred_area = CountWhere(gt, pred, false, 0, true, ps.id);
    int64_t ignored = CountWhere(gt, pred, true, 0, true, ps.id);
    for (const RefSegment& gs : gt.segments) {
      if (gs.crowd && gs.category == ps.category) {
        ignored += CountWhere(gt, pred, true, gs.id, true, ps.id);
      }
    }
    if (2 * ignored > pred_area) continue;
    out[ps.category].fp += 1;
  }
  return out;
}

}  // namespace oracle

#endif  // PANOFLOW_TESTS_ORACLES_PQ_REFERENCE_H_
