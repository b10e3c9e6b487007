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

#ifndef PANOFLOW_PQ_H_
#define PANOFLOW_PQ_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "panoflow/panoptic.h"

namespace panoflow {

struct ClassStats {
  double iou_sum = 0.0;
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;

  ClassStats& operator+=(const ClassStats& other);
  friend bool operator==(const ClassStats&, const ClassStats&) = default;
};

// Per-category accumulators. Merging is fieldwise addition.
struct PQStats {
  std::map<int, ClassStats> per_class;

  PQStats& operator+=(const PQStats& other);
  friend bool operator==(const PQStats&, const PQStats&) = default;
};

// Matches one image. A gt/pred pair of the same category matches when
// IoU > 0.5, where the union leaves out predicted pixels lying on gt void.
// Crowd gt segments never match and never count as false negatives; an
// unmatched prediction is not a false positive when more than half of it
// lies on gt void or on crowd regions of its own category.
PQStats MatchSegments(const PanopticMap& gt, const PanopticMap& pred);

// Fieldwise sum, folded left to right.
PQStats ReduceStats(std::span<const PQStats> stats);

struct Quality {
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  int n = 0;  // classes contributing (aggregates only)
};

struct PQReport {
  std::map<int, Quality> per_class;
  Quality all;
  Quality things;
  Quality stuff;
};

// SQ = iou_sum / tp, RQ = tp / (tp + fp/2 + fn/2), PQ = SQ * RQ (zero when
// undefined). Aggregates are unweighted means over categories of `categories`
// with tp + fp + fn > 0.
PQReport ComputePQ(const PQStats& stats, const CategoryTable& categories);

// {"All": {pq, sq, rq, n}, "Things": {...}, "Stuff": {...},
//  "per_class": {"<id>": {pq, sq, rq}}} at full precision.
std::string ReportToJson(const PQReport& report);

// Human-readable table, values x100 with one decimal.
std::string FormatReportTable(const PQReport& report);

}  // namespace panoflow

#endif  // PANOFLOW_PQ_H_
