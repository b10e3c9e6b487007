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

#include "panoflow/panoptic_io.h"

#include <png.h>
#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "panoflow/error.h"
#include "panoflow/tensor_io.h"

namespace panoflow {

namespace {

void PngErrorFn(png_structp png, png_const_charp message) {
  auto* buffer = static_cast<std::string*>(png_get_error_ptr(png));
  *buffer = message;
  png_longjmp(png, 1);
}

void PngWarningFn(png_structp, png_const_charp) {}

struct ReadCursor {
  std::span<const uint8_t> bytes;
  size_t offset = 0;
};

void PngReadFn(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes.size()) png_error(png, "PNG data truncated");
  std::memcpy(out, cursor->bytes.data() + cursor->offset, length);
  cursor->offset += length;
}

void PngWriteFn(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void PngFlushFn(png_structp) {}

}  // namespace

std::vector<uint8_t> EncodeRgbPng(const RgbImage& image) {
  Require(image.height >= 1 && image.width >= 1 &&
              image.rgb.size() == static_cast<size_t>(image.height * image.width * 3),
          ErrorCode::kInvalidArgument, "encode_png: bad RGB raster dims");
  std::string error;
  std::vector<uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, PngErrorFn, PngWarningFn);
  Require(png != nullptr, ErrorCode::kIo, "encode_png: libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    Fail(ErrorCode::kIo, "encode_png: " + error);
  }
  png_set_write_fn(png, &out, PngWriteFn, PngFlushFn);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_compression_level(png, Z_BEST_COMPRESSION);
  png_set_compression_strategy(png, Z_DEFAULT_STRATEGY);
  png_write_info(png, info);
  const size_t stride = static_cast<size_t>(image.width) * 3;
  for (int64_t y = 0; y < image.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(image.rgb.data() + static_cast<size_t>(y) * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

RgbImage DecodeRgbPng(std::span<const uint8_t> bytes) {
  Require(bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0, ErrorCode::kFormat,
          "decode_png: not a PNG file");
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, PngErrorFn, PngWarningFn);
  Require(png != nullptr, ErrorCode::kIo, "decode_png: libpng init failed");
  png_infop info = png_create_info_struct(png);
  RgbImage image;
  ReadCursor cursor{bytes, 0};
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    Fail(ErrorCode::kFormat, "decode_png: " + error);
  }
  png_set_read_fn(png, &cursor, PngReadFn);
  png_read_info(png, info);
  const png_byte color_type = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  if (depth == 16) png_set_strip_16(png);
  if (depth < 8) png_set_packing(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  image.width = png_get_image_width(png, info);
  image.height = png_get_image_height(png, info);
  const size_t stride = png_get_rowbytes(png, info);
  if (stride != static_cast<size_t>(image.width) * 3) {
    error = "unsupported PNG layout";
    png_longjmp(png, 1);
  }
  image.rgb.resize(stride * static_cast<size_t>(image.height));
  std::vector<png_bytep> rows(static_cast<size_t>(image.height));
  for (int64_t y = 0; y < image.height; ++y) {
    rows[static_cast<size_t>(y)] = image.rgb.data() + static_cast<size_t>(y) * stride;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

std::vector<uint8_t> EncodePanopticPng(const PanopticMap& map) {
  RgbImage image{map.height, map.width, std::vector<uint8_t>(map.ids.size() * 3)};
  for (size_t p = 0; p < map.ids.size(); ++p) {
    const uint32_t id = map.ids[p];
    Require(id <= kMaxSegmentId, ErrorCode::kInvalidArgument,
            "encode_png: segment id " + std::to_string(id) + " exceeds 256^3 - 1");
    image.rgb[3 * p] = static_cast<uint8_t>(id & 0xFF);
    image.rgb[3 * p + 1] = static_cast<uint8_t>((id >> 8) & 0xFF);
    image.rgb[3 * p + 2] = static_cast<uint8_t>((id >> 16) & 0xFF);
  }
  return EncodeRgbPng(image);
}

PanopticMap DecodePanopticIds(std::span<const uint8_t> bytes) {
  const RgbImage image = DecodeRgbPng(bytes);
  PanopticMap map(image.height, image.width);
  for (size_t p = 0; p < map.ids.size(); ++p) {
    map.ids[p] = static_cast<uint32_t>(image.rgb[3 * p]) |
                 static_cast<uint32_t>(image.rgb[3 * p + 1]) << 8 |
                 static_cast<uint32_t>(image.rgb[3 * p + 2]) << 16;
  }
  return map;
}

PanopticMap DecodePanopticPng(std::span<const uint8_t> bytes,
                              std::span<const SegmentInfo> segments_info,
                              const CategoryTable& categories) {
  PanopticMap map = DecodePanopticIds(bytes);
  std::unordered_map<uint32_t, int64_t> counts;
  for (uint32_t id : map.ids) ++counts[id];
  for (const SegmentInfo& info : segments_info) {
    const Category& category = categories.Get(info.category_id);
    const int64_t count = counts.count(info.id) ? counts[info.id] : 0;
    Require(info.id != 0, ErrorCode::kSchema, "segments_info id 0 is reserved for void");
    Require(count > 0, ErrorCode::kSchema,
            "segment " + std::to_string(info.id) + " listed but absent from the PNG");
    if (info.area && *info.area != count) {
      Fail(ErrorCode::kSchema, "segment " + std::to_string(info.id) + " lists area " +
                                   std::to_string(*info.area) + " but the PNG has " +
                                   std::to_string(count) + " pixels");
    }
    map.segments.push_back({info.id, info.category_id, category.isthing, count, info.iscrowd,
                            info.score});
  }
  map.Validate();
  return map;
}

std::vector<SegmentInfo> SegmentsInfoOf(const PanopticMap& map) {
  std::vector<SegmentInfo> out;
  for (const Segment& s : map.segments) {
    out.push_back({s.id, s.category_id, s.iscrowd, s.area, s.score});
  }
  return out;
}

namespace {

std::vector<Category> ParseCategories(const nlohmann::json& doc) {
  std::vector<Category> out;
  for (const auto& c : doc.at("categories")) {
    out.push_back({c.at("id").get<int>(), c.at("isthing").get<int>() != 0,
                   c.value("name", std::string())});
  }
  return out;
}

}  // namespace

ArchiveReader::ArchiveReader(const std::filesystem::path& json_path,
                             const std::filesystem::path& png_dir)
    : png_dir_(png_dir) {
  const std::vector<uint8_t> text = ReadFileBytes(json_path);
  try {
    const nlohmann::json doc = nlohmann::json::parse(text.begin(), text.end());
    categories_ = CategoryTable(ParseCategories(doc));
    for (const auto& a : doc.at("annotations")) {
      AnnotationRecord record;
      record.image_id = a.at("image_id").get<int64_t>();
      record.file_name = a.at("file_name").get<std::string>();
      for (const auto& s : a.at("segments_info")) {
        SegmentInfo info;
        info.id = s.at("id").get<uint32_t>();
        info.category_id = s.at("category_id").get<int>();
        info.iscrowd = s.value("iscrowd", 0) != 0;
        if (s.contains("area")) info.area = s.at("area").get<int64_t>();
        if (s.contains("score")) info.score = s.at("score").get<double>();
        record.segments_info.push_back(info);
      }
      annotations_.push_back(std::move(record));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchema, json_path.string() + ": " + e.what());
  }
  std::stable_sort(annotations_.begin(), annotations_.end(),
                   [](const AnnotationRecord& a, const AnnotationRecord& b) {
                     return a.image_id < b.image_id;
                   });
  for (size_t i = 1; i < annotations_.size(); ++i) {
    Require(annotations_[i].image_id != annotations_[i - 1].image_id, ErrorCode::kSchema,
            json_path.string() + ": duplicate annotation for image_id " +
                std::to_string(annotations_[i].image_id));
  }
}

ArchiveItem ArchiveReader::Load(size_t index) const {
  const AnnotationRecord& record = annotations_.at(index);
  const std::filesystem::path path = png_dir_ / record.file_name;
  Require(std::filesystem::exists(path), ErrorCode::kIo,
          "missing panoptic PNG " + path.string());
  try {
    return {record, DecodePanopticPng(ReadFileBytes(path), record.segments_info, categories_)};
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::optional<ArchiveItem> ArchiveReader::Next() {
  if (cursor_ >= annotations_.size()) return std::nullopt;
  return Load(cursor_++);
}

void WriteArchive(const std::filesystem::path& json_path, const std::filesystem::path& png_dir,
                  std::span<const ArchiveEntry> entries, const CategoryTable& categories) {
  std::filesystem::create_directories(png_dir);
  nlohmann::json images = nlohmann::json::array();
  nlohmann::json annotations = nlohmann::json::array();
  for (const ArchiveEntry& e : entries) {
    e.map.Validate();
    WriteFileBytes(png_dir / e.file_name, EncodePanopticPng(e.map));
    images.push_back({{"id", e.image_id},
                      {"file_name", e.file_name},
                      {"height", e.map.height},
                      {"width", e.map.width}});
    nlohmann::json segments = nlohmann::json::array();
    for (const Segment& s : e.map.segments) {
      nlohmann::json item = {{"id", s.id},
                             {"category_id", s.category_id},
                             {"iscrowd", s.iscrowd ? 1 : 0},
                             {"area", s.area}};
      if (s.score) item["score"] = *s.score;
      segments.push_back(std::move(item));
    }
    annotations.push_back(
        {{"image_id", e.image_id}, {"file_name", e.file_name}, {"segments_info", segments}});
  }
  nlohmann::json cats = nlohmann::json::array();
  for (const Category& c : categories.all()) {
    cats.push_back({{"id", c.id}, {"isthing", c.isthing ? 1 : 0}, {"name", c.name}});
  }
  const nlohmann::json doc = {
      {"images", images}, {"annotations", annotations}, {"categories", cats}};
  const std::string text = doc.dump(1);
  WriteFileBytes(json_path,
                 std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

}  // namespace panoflow
