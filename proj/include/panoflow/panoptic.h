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

#ifndef PANOFLOW_PANOPTIC_H_
#define PANOFLOW_PANOPTIC_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace panoflow {

struct Category {
  int id = 0;
  bool isthing = false;
  std::string name;
};

struct Segment {
  uint32_t id = 0;
  int category_id = 0;
  bool isthing = false;
  int64_t area = 0;
  bool iscrowd = false;
  std::optional<double> score;
};

// Per-pixel segment ids (0 = void) plus the segment table.
struct PanopticMap {
  int64_t height = 0;
  int64_t width = 0;
  std::vector<uint32_t> ids;
  std::vector<Segment> segments;

  PanopticMap() = default;
  PanopticMap(int64_t h, int64_t w) : height(h), width(w), ids(static_cast<size_t>(h * w), 0) {}

  uint32_t at(int64_t y, int64_t x) const { return ids[static_cast<size_t>(y * width + x)]; }
  const Segment* Find(uint32_t id) const;

  // Recomputes every segment area from the raster.
  void RecountAreas();

  // Throws kSchema unless: ids are unique and non-zero, every raster id is 0
  // or listed, and every listed area equals its raster count and is >= 1.
  void Validate() const;
};

// Category lookup; throws kSchema for unknown ids.
class CategoryTable {
 public:
  CategoryTable() = default;
  explicit CategoryTable(std::vector<Category> categories);

  const Category& Get(int id) const;
  bool Has(int id) const;
  const std::vector<Category>& all() const { return categories_; }

 private:
  std::vector<Category> categories_;
};

}  // namespace panoflow

#endif  // PANOFLOW_PANOPTIC_H_
