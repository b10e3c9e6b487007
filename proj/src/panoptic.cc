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

#include "panoflow/panoptic.h"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "panoflow/error.h"

namespace panoflow {

const Segment* PanopticMap::Find(uint32_t id) const {
  for (const Segment& s : segments) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

void PanopticMap::RecountAreas() {
  std::unordered_map<uint32_t, int64_t> counts;
  for (uint32_t id : ids) ++counts[id];
  for (Segment& s : segments) s.area = counts[s.id];
}

void PanopticMap::Validate() const {
  Require(height >= 1 && width >= 1 && static_cast<int64_t>(ids.size()) == height * width,
          ErrorCode::kSchema, "panoptic map raster size does not match its dims");
  std::unordered_map<uint32_t, int64_t> counts;
  for (uint32_t id : ids) ++counts[id];
  std::unordered_set<uint32_t> listed;
  for (const Segment& s : segments) {
    Require(s.id != 0, ErrorCode::kSchema, "segment id 0 is reserved for void");
    Require(listed.insert(s.id).second, ErrorCode::kSchema,
            "duplicate segment id " + std::to_string(s.id));
    const int64_t count = counts.count(s.id) ? counts[s.id] : 0;
    Require(count >= 1, ErrorCode::kSchema,
            "segment " + std::to_string(s.id) + " does not appear in the raster");
    Require(s.area == count, ErrorCode::kSchema,
            "segment " + std::to_string(s.id) + " lists area " + std::to_string(s.area) +
                " but covers " + std::to_string(count) + " pixels");
  }
  for (const auto& [id, count] : counts) {
    Require(id == 0 || listed.count(id) != 0, ErrorCode::kSchema,
            "raster id " + std::to_string(id) + " is not listed in segments_info");
  }
}

CategoryTable::CategoryTable(std::vector<Category> categories)
    : categories_(std::move(categories)) {
  std::unordered_set<int> seen;
  for (const Category& c : categories_) {
    Require(seen.insert(c.id).second, ErrorCode::kSchema,
            "duplicate category id " + std::to_string(c.id));
  }
}

const Category& CategoryTable::Get(int id) const {
  auto it = std::find_if(categories_.begin(), categories_.end(),
                         [id](const Category& c) { return c.id == id; });
  Require(it != categories_.end(), ErrorCode::kSchema, "unknown category id " + std::to_string(id));
  return *it;
}

bool CategoryTable::Has(int id) const {
  return std::any_of(categories_.begin(), categories_.end(),
                     [id](const Category& c) { return c.id == id; });
}

}  // namespace panoflow
