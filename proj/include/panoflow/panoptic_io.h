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

#ifndef PANOFLOW_PANOPTIC_IO_H_
#define PANOFLOW_PANOPTIC_IO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panoflow/fusion.h"
#include "panoflow/panoptic.h"

namespace panoflow {

inline constexpr uint32_t kMaxSegmentId = (1u << 24) - 1;

// 8-bit RGB PNG, written with filter NONE and zlib level 9 so identical
// rasters give identical bytes. Decoding accepts any PNG libpng can expand
// to 8-bit RGB.
std::vector<uint8_t> EncodeRgbPng(const RgbImage& image);
RgbImage DecodeRgbPng(std::span<const uint8_t> bytes);

// Segment id = R + 256 * G + 256^2 * B; void is (0, 0, 0).
std::vector<uint8_t> EncodePanopticPng(const PanopticMap& map);

// Raster ids only; segments are left empty.
PanopticMap DecodePanopticIds(std::span<const uint8_t> bytes);

struct SegmentInfo {
  uint32_t id = 0;
  int category_id = 0;
  bool iscrowd = false;
  std::optional<int64_t> area;
  std::optional<double> score;
};

// Inverse of EncodePanopticPng. Every listed id must appear, every raster id
// must be listed, and listed areas must match (ErrorCode::kSchema).
PanopticMap DecodePanopticPng(std::span<const uint8_t> bytes,
                              std::span<const SegmentInfo> segments_info,
                              const CategoryTable& categories);

std::vector<SegmentInfo> SegmentsInfoOf(const PanopticMap& map);

struct AnnotationRecord {
  int64_t image_id = 0;
  std::string file_name;
  std::vector<SegmentInfo> segments_info;
};

struct ArchiveItem {
  AnnotationRecord annotation;
  PanopticMap map;
};

// COCO panoptic archive: annotation JSON + directory of id-encoded PNGs.
// Items are ordered by image_id and decoded lazily.
class ArchiveReader {
 public:
  ArchiveReader(const std::filesystem::path& json_path, const std::filesystem::path& png_dir);

  const CategoryTable& categories() const { return categories_; }
  const std::vector<AnnotationRecord>& annotations() const { return annotations_; }
  size_t size() const { return annotations_.size(); }

  // Decodes item `index`; throws kIo naming the PNG when it is missing.
  ArchiveItem Load(size_t index) const;

  // Streaming access: returns items in order, then std::nullopt.
  std::optional<ArchiveItem> Next();

 private:
  std::filesystem::path png_dir_;
  CategoryTable categories_;
  std::vector<AnnotationRecord> annotations_;
  size_t cursor_ = 0;
};

struct ArchiveEntry {
  int64_t image_id = 0;
  std::string file_name;  // PNG file name inside png_dir
  PanopticMap map;
};

// Writes the annotation JSON (images, annotations, categories) and one PNG
// per entry into png_dir (created if needed).
void WriteArchive(const std::filesystem::path& json_path, const std::filesystem::path& png_dir,
                  std::span<const ArchiveEntry> entries, const CategoryTable& categories);

}  // namespace panoflow

#endif  // PANOFLOW_PANOPTIC_IO_H_
