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


#include <cmath>
#include <fstream>

#include "doctest.h"
#include "nlohmann/json.hpp"
#include "panoflow/pipeline.h"
#include "panoflow/tensor_io.h"
#include "test_util.h"

using panoflow::ErrorCode;
using panoflow::RunConfig;
using panoflow::Tensor;
using testutil::CodeOf;
using testutil::TempDir;

namespace {

RunConfig SmallConfig(uint64_t seed = 0) {
  RunConfig c;
  c.image_size = 128;
  c.seed = seed;
  c.subnets.channels = 16;
  c.heads.num_thing_classes = 5;
  c.heads.num_stuff_classes = 4;
  c.heads.stuff_channels = 32;
  c.heads.gn_groups = 8;
  c.Finalize();
  return c;
}

bool SameValues(const Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape())) return false;
  auto x = a.data();
  auto y = b.data();
  return std::equal(x.begin(), x.end(), y.begin());
}

void WriteArchiveOf(const TempDir& dir, const std::string& name,
                    const std::vector<panoflow::ArchiveEntry>& entries) {
  panoflow::WriteArchive(dir / (name + ".json"), dir / name, entries,
                         panoflow::CategoryTable({{1, true, "a"}, {2, false, "b"}}));
}

panoflow::PanopticMap Blocks(int64_t n, uint32_t first, int shift) {
  panoflow::PanopticMap map(n, n);
  for (int64_t y = 0; y < n; ++y) {
    for (int64_t x = 0; x < n; ++x) {
      map.ids[static_cast<size_t>(y * n + x)] = x + shift < n / 2 ? first : first + 1;
    }
  }
  map.segments = {{first, 1, true, 0, false, {}}, {first + 1, 2, false, 0, false, {}}};
  map.RecountAreas();
  return map;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("forward produces the expected layout") {
  const RunConfig c = SmallConfig();
  const auto r = panoflow::RunForward(c, panoflow::SeededImage(128, 0), panoflow::ResolveWeights(c));
  for (int level = 3; level <= 7; ++level) {
    const int64_t side = 128 >> level;
    CHECK(r.pyramid.levels.at(level).shape() == panoflow::Shape{1, 16, side, side});
    CHECK(r.heads.cls_logits.at(level).channels() == 9 * 5);
    CHECK(r.heads.box_deltas.at(level).channels() == 9 * 4);
  }
  CHECK(r.stuff_probs.shape() == panoflow::Shape{1, 5, 128, 128});
  for (int64_t p = 0; p < 128 * 128; p += 97) {
    double sum = 0;
    for (int64_t ch = 0; ch < 5; ++ch) sum += r.stuff_probs.plane(0, ch)[p];
    CHECK(std::abs(sum - 1.0) <= 1e-6);
  }
  CHECK(r.instances.size() == r.things.masks.size());
  CHECK(r.detections.size() <= 100);
}

TEST_CASE("seeded image is deterministic and bounded") {
  const Tensor a = panoflow::SeededImage(128, 5);
  CHECK(testutil::BitEqual(a.data(), panoflow::SeededImage(128, 5).data()));
  CHECK_FALSE(testutil::BitEqual(a.data(), panoflow::SeededImage(128, 6).data()));
  for (float v : a.data()) CHECK((v >= -1.0f && v < 1.0f));
}

TEST_CASE("forward report is reproducible for a seed") {
  const std::string a = panoflow::CmdForward(SmallConfig(3));
  CHECK(a == panoflow::CmdForward(SmallConfig(3)));
  CHECK(a != panoflow::CmdForward(SmallConfig(4)));
  CHECK(a.find("stuff_probs") != std::string::npos);
  CHECK(a.find("detections ") != std::string::npos);
}

TEST_CASE("forward dumps and checkpoint round trip") {
  TempDir dir("pipe");
  RunConfig c = SmallConfig(1);
  c.paths.out = (dir / "fwd").string();
  c.paths.save_checkpoint = (dir / "ckpt.json").string();
  const std::string report = panoflow::CmdForward(c);
  for (const char* f : {"P3.ftns", "P7.ftns", "cls_P3.ftns", "cls_P7.ftns", "stuff_P3.ftns",
                        "stuff_P5.ftns", "stuff_probs.ftns", "detections.json"}) {
    CHECK(std::filesystem::exists(dir / "fwd" / f));
  }
  const auto dets = panoflow::ReadDetections(dir / "fwd" / "detections.json");
  const bool any_mask = std::any_of(dets.begin(), dets.end(),
                                    [](const auto& d) { return d.mask_index.has_value(); });
  CHECK(std::filesystem::exists(dir / "fwd" / "instances.ftns") == any_mask);

  panoflow::WriteTensor(dir / "image.ftns", panoflow::SeededImage(128, 1));
  RunConfig again = SmallConfig(99);
  again.paths.checkpoint = c.paths.save_checkpoint;
  again.paths.image = (dir / "image.ftns").string();
  CHECK(panoflow::CmdForward(again) == report);
}

TEST_CASE("disabled flows match zeroed flow adapters") {
  TempDir dir("pipe");
  RunConfig on = SmallConfig(2);
  panoflow::WeightStore weights = panoflow::ResolveWeights(on);
  std::vector<std::string> flows;
  for (const auto& [name, entry] : weights.entries()) {
    if (name.rfind("flow.", 0) == 0) flows.push_back(name);
  }
  REQUIRE_FALSE(flows.empty());
  for (const auto& name : flows) weights.Zero(name);

  RunConfig off = on;
  panoflow::DisableFlow(off, "all");
  const Tensor image = panoflow::SeededImage(128, 2);
  const auto zeroed = panoflow::RunForward(on, image, weights);
  const auto disabled = panoflow::RunForward(off, image, weights);
  for (const auto& [level, t] : zeroed.features.cls) {
    CHECK(SameValues(t, disabled.features.cls.at(level)));
  }
  for (const auto& [level, t] : zeroed.features.stuff) {
    CHECK(SameValues(t, disabled.features.stuff.at(level)));
  }
  CHECK(SameValues(zeroed.stuff_probs, disabled.stuff_probs));
}

TEST_CASE("fuse writes a valid archive") {
  TempDir dir("pipe");
  RunConfig c = SmallConfig(1);
  c.paths.out = (dir / "fwd").string();
  panoflow::CmdForward(c);
  const std::string fwd = c.paths.out;
  c.paths.out = (dir / "fused").string();
  c.image_id = 17;
  c.fusion.stuff_area_limit = 64;
  panoflow::FuseArgs args;
  args.stuff = fwd + "/stuff_probs.ftns";
  args.detections = fwd + "/detections.json";
  if (std::filesystem::exists(fwd + "/instances.ftns")) args.instances = fwd + "/instances.ftns";
  const std::string summary = panoflow::CmdFuse(c, args);
  CHECK(summary.rfind("segments ", 0) == 0);
  CHECK(summary.find("void_fraction ") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "fused" / "panoptic" / "000000000017.png"));
  panoflow::ArchiveReader reader(dir / "fused" / "panoptic.json", dir / "fused" / "panoptic");
  REQUIRE(reader.size() == 1);
  const auto item = reader.Load(0);
  CHECK(item.annotation.image_id == 17);
  item.map.Validate();
  CHECK(item.map.height == 128);
}

TEST_CASE("fuse input errors") {
  TempDir dir("pipe");
  RunConfig c = SmallConfig();
  panoflow::FuseArgs args;
  CHECK(CodeOf([&] { panoflow::CmdFuse(c, args); }) == ErrorCode::kConfig);
  c.paths.out = (dir / "o").string();
  panoflow::WriteTensor(dir / "stuff.ftns", Tensor(panoflow::Shape{1, 5, 64, 64}, 0.2f));
  panoflow::WriteTensor(dir / "inst.ftns", Tensor(panoflow::Shape{1, 1, 32, 32}, 1.0f));
  args.stuff = (dir / "stuff.ftns").string();
  args.instances = (dir / "inst.ftns").string();
  CHECK(CodeOf([&] { panoflow::CmdFuse(c, args); }) == ErrorCode::kShapeMismatch);
  panoflow::WriteTensor(dir / "inst.ftns", Tensor(panoflow::Shape{1, 1, 64, 64}, 1.0f));
  testutil::WriteText(dir / "d.json",
                      R"([{"bbox": [0, 0, 8, 8], "category_id": 1, "score": 0.9, "mask_index": 4}])");
  args.detections = (dir / "d.json").string();
  CHECK(CodeOf([&] { panoflow::CmdFuse(c, args); }) == ErrorCode::kSchema);
  args.stuff = (dir / "absent.ftns").string();
  CHECK(CodeOf([&] { panoflow::CmdFuse(c, args); }) == ErrorCode::kIo);
}

TEST_CASE("parallel evaluation equals sequential evaluation") {
  TempDir dir("pipe");
  std::vector<panoflow::ArchiveEntry> gt, pred;
  for (int64_t i = 0; i < 9; ++i) {
    const std::string file = std::to_string(i) + ".png";
    gt.push_back({i, file, Blocks(16, 1, 0)});
    pred.push_back({8 - i, std::to_string(8 - i) + ".png", Blocks(16, 5, static_cast<int>(i % 7))});
  }
  WriteArchiveOf(dir, "gt", gt);
  WriteArchiveOf(dir, "pred", pred);
  const panoflow::ArchiveReader g(dir / "gt.json", dir / "gt");
  const panoflow::ArchiveReader p(dir / "pred.json", dir / "pred");
  const auto one = panoflow::EvaluateArchives(g, p, 1);
  for (int workers : {2, 3, 8}) {
    const auto many = panoflow::EvaluateArchives(g, p, workers);
    REQUIRE(many.per_class.size() == one.per_class.size());
    for (const auto& [c, s] : one.per_class) {
      CHECK(many.per_class.at(c).tp == s.tp);
      CHECK(many.per_class.at(c).fp == s.fp);
      CHECK(many.per_class.at(c).fn == s.fn);
      CHECK(many.per_class.at(c).iou_sum == s.iou_sum);
    }
  }
  CHECK(one.per_class.at(1).tp > 0);
  CHECK(one.per_class.at(1).fn > 0);
}

TEST_CASE("evaluate reports and missing predictions") {
  TempDir dir("pipe");
  WriteArchiveOf(dir, "gt", {{1, "a.png", Blocks(16, 1, 0)}, {2, "b.png", Blocks(16, 1, 0)}});
  WriteArchiveOf(dir, "pred", {{1, "a.png", Blocks(16, 3, 0)}, {2, "b.png", Blocks(16, 3, 0)}});
  WriteArchiveOf(dir, "short", {{1, "a.png", Blocks(16, 3, 0)}});
  RunConfig c = SmallConfig();
  c.paths.out = (dir / "eval").string();
  const auto r = panoflow::CmdEvaluate(c, (dir / "gt.json").string(), (dir / "gt").string(),
                                       (dir / "pred.json").string(), (dir / "pred").string());
  CHECK(r.report.all.pq == 1.0);
  CHECK(r.table.find("100.0") != std::string::npos);
  CHECK(testutil::ReadText(dir / "eval" / "pq_report.json") == r.json);
  try {
    panoflow::CmdEvaluate(c, (dir / "gt.json").string(), (dir / "gt").string(),
                          (dir / "short.json").string(), (dir / "short").string());
    FAIL("expected an error");
  } catch (const panoflow::Error& e) {
    CHECK(e.code() == ErrorCode::kSchema);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("colorize writes an RGB PNG") {
  TempDir dir("pipe");
  const auto map = Blocks(16, 1, 0);
  const auto bytes = panoflow::EncodePanopticPng(map);
  panoflow::WriteFileBytes(dir / "in.png", bytes);
  RunConfig c = SmallConfig();
  panoflow::CmdColorize(c, (dir / "in.png").string(), (dir / "out.png").string());
  const auto rgb = panoflow::DecodeRgbPng(panoflow::ReadFileBytes(dir / "out.png"));
  CHECK(rgb.height == 16);
  CHECK(rgb.width == 16);
  CHECK(rgb.rgb == panoflow::Colorize(map, 0).rgb);
}

}  // TEST_SUITE
