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

#include "panoflow/pq.h"

#include <cstdio>
#include <unordered_map>

#include "json.hpp"
#include "panoflow/error.h"

namespace panoflow {

ClassStats& ClassStats::operator+=(const ClassStats& other) {
  iou_sum += other.iou_sum;
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  return *this;
}

PQStats& PQStats::operator+=(const PQStats& other) {
  for (const auto& [category, s] : other.per_class) per_class[category] += s;
  return *this;
}

namespace {

std::unordered_map<uint32_t, size_t> IndexSegments(const PanopticMap& map, const char* which) {
  std::unordered_map<uint32_t, size_t> index;
  for (size_t i = 0; i < map.segments.size(); ++i) {
    const uint32_t id = map.segments[i].id;
    Require(id != 0, ErrorCode::kSchema, std::string(which) + ": segment id 0 is reserved");
    Require(index.emplace(id, i).second, ErrorCode::kSchema,
            std::string(which) + ": duplicate segment id " + std::to_string(id));
  }
  return index;
}

}  // namespace

PQStats MatchSegments(const PanopticMap& gt, const PanopticMap& pred) {
  if (gt.height != pred.height || gt.width != pred.width) {
    Fail(ErrorCode::kShapeMismatch,
         "match_segments: gt " + std::to_string(gt.height) + "x" + std::to_string(gt.width) +
             " vs pred " + std::to_string(pred.height) + "x" + std::to_string(pred.width));
  }
  Require(gt.ids.size() == static_cast<size_t>(gt.height * gt.width) &&
              pred.ids.size() == gt.ids.size(),
          ErrorCode::kShapeMismatch, "match_segments: raster size does not match dims");
  const auto gt_index = IndexSegments(gt, "gt");
  const auto pred_index = IndexSegments(pred, "pred");

  const size_t n_gt = gt.segments.size();
  const size_t n_pred = pred.segments.size();
  // Slot 0 is void; slot i + 1 is segment i.
  std::vector<int64_t> gt_area(n_gt + 1, 0), pred_area(n_pred + 1, 0);
  std::vector<int64_t> inter((n_gt + 1) * (n_pred + 1), 0);
  for (size_t p = 0; p < gt.ids.size(); ++p) {
    size_t g = 0, q = 0;
    if (gt.ids[p] != 0) {
      auto it = gt_index.find(gt.ids[p]);
      Require(it != gt_index.end(), ErrorCode::kSchema,
              "gt raster id " + std::to_string(gt.ids[p]) + " is not listed");
      g = it->second + 1;
    }
    if (pred.ids[p] != 0) {
      auto it = pred_index.find(pred.ids[p]);
      Require(it != pred_index.end(), ErrorCode::kSchema,
              "pred raster id " + std::to_string(pred.ids[p]) + " is not listed");
      q = it->second + 1;
    }
    ++gt_area[g];
    ++pred_area[q];
    ++inter[g * (n_pred + 1) + q];
  }

  PQStats stats;
  std::vector<bool> gt_matched(n_gt, false), pred_matched(n_pred, false);
  for (size_t g = 0; g < n_gt; ++g) {
    const Segment& gs = gt.segments[g];
    if (gs.iscrowd) continue;
    for (size_t q = 0; q < n_pred; ++q) {
      const Segment& ps = pred.segments[q];
      if (gs.category_id != ps.category_id) continue;
      const int64_t i = inter[(g + 1) * (n_pred + 1) + q + 1];
      if (i == 0) continue;
      const int64_t pred_on_void = inter[q + 1];
      const int64_t uni = pred_area[q + 1] + gt_area[g + 1] - i - pred_on_void;
      const double iou = static_cast<double>(i) / static_cast<double>(uni);
      if (iou > 0.5) {
        ClassStats& cs = stats.per_class[gs.category_id];
        cs.tp += 1;
        cs.iou_sum += iou;
        gt_matched[g] = true;
        pred_matched[q] = true;
      }
    }
  }
  for (size_t g = 0; g < n_gt; ++g) {
    const Segment& gs = gt.segments[g];
    if (gs.iscrowd) continue;
    if (!gt_matched[g]) stats.per_class[gs.category_id].fn += 1;
  }
  for (size_t q = 0; q < n_pred; ++q) {
    if (pred_matched[q]) continue;
    const Segment& ps = pred.segments[q];
    int64_t ignored = inter[q + 1];
    for (size_t g = 0; g < n_gt; ++g) {
      const Segment& gs = gt.segments[g];
      if (gs.iscrowd && gs.category_id == ps.category_id) {
        ignored += inter[(g + 1) * (n_pred + 1) + q + 1];
      }
    }
    if (pred_area[q + 1] > 0 &&
        static_cast<double>(ignored) / static_cast<double>(pred_area[q + 1]) > 0.5) {
      continue;
    }
    stats.per_class[ps.category_id].fp += 1;
  }
  return stats;
}

PQStats ReduceStats(std::span<const PQStats> stats) {
  PQStats out;
  for (const PQStats& s : stats) out += s;
  return out;
}

PQReport ComputePQ(const PQStats& stats, const CategoryTable& categories) {
  PQReport report;
  for (const auto& [category, s] : stats.per_class) categories.Get(category);

  Quality* groups[] = {&report.all, &report.things, &report.stuff};
  for (const Category& category : categories.all()) {
    auto it = stats.per_class.find(category.id);
    if (it == stats.per_class.end()) continue;
    const ClassStats& s = it->second;
    if (s.tp + s.fp + s.fn == 0) continue;
    Quality q;
    q.sq = s.tp > 0 ? s.iou_sum / static_cast<double>(s.tp) : 0.0;
    const double denom = static_cast<double>(s.tp) + 0.5 * static_cast<double>(s.fp) +
                         0.5 * static_cast<double>(s.fn);
    q.rq = denom > 0.0 ? static_cast<double>(s.tp) / denom : 0.0;
    q.pq = q.sq * q.rq;
    report.per_class[category.id] = q;
    for (Quality* g : {groups[0], category.isthing ? groups[1] : groups[2]}) {
      g->pq += q.pq;
      g->sq += q.sq;
      g->rq += q.rq;
      g->n += 1;
    }
  }
  for (Quality* g : groups) {
    if (g->n == 0) continue;
    g->pq /= g->n;
    g->sq /= g->n;
    g->rq /= g->n;
  }
  return report;
}

std::string ReportToJson(const PQReport& report) {
  auto quality = [](const Quality& q) {
    return nlohmann::json{{"pq", q.pq}, {"sq", q.sq}, {"rq", q.rq}, {"n", q.n}};
  };
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [id, q] : report.per_class) {
    per_class[std::to_string(id)] = {{"pq", q.pq}, {"sq", q.sq}, {"rq", q.rq}};
  }
  nlohmann::json doc = {{"All", quality(report.all)},
                        {"Things", quality(report.things)},
                        {"Stuff", quality(report.stuff)},
                        {"per_class", per_class}};
  return doc.dump(2);
}

std::string FormatReportTable(const PQReport& report) {
  std::string out = "          |    PQ     SQ     RQ  |   N\n";
  out += "----------+----------------------+-----\n";
  char line[128];
  const std::pair<const char*, const Quality*> rows[] = {
      {"All", &report.all}, {"Things", &report.things}, {"Stuff", &report.stuff}};
  for (const auto& [name, q] : rows) {
    std::snprintf(line, sizeof(line), "%-10s| %5.1f  %5.1f  %5.1f  | %4d\n", name, 100.0 * q->pq,
                  100.0 * q->sq, 100.0 * q->rq, q->n);
    out += line;
  }
  if (report.per_class.empty()) return out;
  out += "----------+----------------------+-----\n";
  for (const auto& [id, q] : report.per_class) {
    std::snprintf(line, sizeof(line), "cat %-6d| %5.1f  %5.1f  %5.1f  |\n", id, 100.0 * q.pq,
                  100.0 * q.sq, 100.0 * q.rq);
    out += line;
  }
  return out;
}

}  // namespace panoflow
