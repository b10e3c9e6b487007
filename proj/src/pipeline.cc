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

#include "panoflow/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <sstream>
#include <thread>

#include "panoflow/error.h"
#include "panoflow/rng.h"
#include "panoflow/tensor_io.h"

namespace panoflow {

namespace fs = std::filesystem;

std::vector<WeightSpec> ModelWeightSpecs(const RunConfig& config) {
  std::vector<WeightSpec> specs = BackboneWeightSpecs(config.subnets.channels);
  for (WeightSpec& s : SubnetWeightSpecs(config.subnets)) specs.push_back(std::move(s));
  for (WeightSpec& s : HeadWeightSpecs(config.heads, config.subnets.channels)) {
    specs.push_back(std::move(s));
  }
  return specs;
}

Tensor SeededImage(int64_t size, uint64_t seed) {
  Tensor image(Shape{1, 3, size, size});
  SplitMix64 rng(StreamSeed(seed, "image"));
  for (float& v : image.data()) v = static_cast<float>(rng.Uniform(-1.0, 1.0));
  return image;
}

WeightStore ResolveWeights(const RunConfig& config) {
  if (!config.paths.checkpoint.empty()) return LoadCheckpoint(config.paths.checkpoint);
  return InitWeights(ModelWeightSpecs(config), config.seed);
}

ForwardResult RunForward(const RunConfig& config, const Tensor& image, const WeightStore& weights) {
  Require(image.batch() == 1 && image.channels() == 3, ErrorCode::kShapeMismatch,
          "forward: image must be 1x3xHxW, got " + image.shape().ToString());
  ForwardResult r;
  r.image = image;
  r.pyramid = BuildPyramid(image, weights);
  r.features = RunSubnets(r.pyramid, config.subnets, weights);
  r.heads = RunClsRegHeads(r.features, config.heads, weights);
  const int64_t h = image.height();
  const int64_t w = image.width();
  r.detections = DecodeDetections(r.heads.cls_logits, r.heads.box_deltas,
                                  config.heads.num_thing_classes, config.detection, h, w);
  r.things = RunThingHead(r.features, r.detections, config.heads, weights);
  for (const RoiMask& roi : r.things.masks) r.instances.push_back(PasteMask(roi, h, w));
  r.stuff_probs = RunStuffHead(r.features, config.heads, weights);
  return r;
}

namespace {

void ReportLine(std::ostringstream& out, const std::string& name, const Tensor& t) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %-18s mean=% .6e max=% .6e\n", name.c_str(),
                t.shape().ToString().c_str(), static_cast<double>(t.Mean()),
                static_cast<double>(t.Max()));
  out << line;
}

void ReportLevels(std::ostringstream& out, const std::string& prefix,
                  const std::map<int, Tensor>& levels) {
  for (const auto& [level, t] : levels) ReportLine(out, prefix + "P" + std::to_string(level), t);
}

Tensor StackInstances(const std::vector<InstanceMask>& instances, int64_t h, int64_t w) {
  Tensor out(Shape{static_cast<int64_t>(instances.size()), 1, h, w});
  auto data = out.data();
  for (size_t n = 0; n < instances.size(); ++n) {
    const auto& bits = instances[n].mask.bits;
    std::transform(bits.begin(), bits.end(),
                   data.begin() + static_cast<int64_t>(n) * h * w,
                   [](uint8_t b) { return static_cast<float>(b); });
  }
  return out;
}

std::string ArchiveFileName(int64_t image_id) {
  char name[32];
  std::snprintf(name, sizeof(name), "%012" PRId64 ".png", image_id);
  return name;
}

}  // namespace

std::string FormatForwardReport(const ForwardResult& r) {
  std::ostringstream out;
  ReportLine(out, "image", r.image);
  ReportLevels(out, "", r.pyramid.levels);
  ReportLevels(out, "cls.", r.features.cls);
  ReportLevels(out, "reg.", r.features.reg);
  ReportLevels(out, "thing.", r.features.thing);
  ReportLevels(out, "stuff.", r.features.stuff);
  ReportLevels(out, "cls_logits.", r.heads.cls_logits);
  ReportLevels(out, "box_deltas.", r.heads.box_deltas);
  ReportLine(out, "stuff_probs", r.stuff_probs);
  out << "detections " << r.detections.size() << "\n";
  out << "instances " << r.instances.size() << "\n";
  for (const std::string& warning : r.things.warnings) out << "warning: " << warning << "\n";
  return out.str();
}

std::string CmdForward(const RunConfig& config) {
  const Tensor image = config.paths.image.empty() ? SeededImage(config.image_size, config.seed)
                                                  : ReadTensor(config.paths.image);
  const WeightStore weights = ResolveWeights(config);
  if (!config.paths.save_checkpoint.empty()) {
    SaveCheckpoint(weights, config.paths.save_checkpoint);
  }
  const ForwardResult r = RunForward(config, image, weights);
  if (!config.paths.out.empty()) {
    const fs::path dir = config.paths.out;
    fs::create_directories(dir);
    for (const auto& [level, t] : r.pyramid.levels) {
      WriteTensor(dir / ("P" + std::to_string(level) + ".ftns"), t);
    }
    for (const auto& [level, t] : r.features.cls) {
      WriteTensor(dir / ("cls_P" + std::to_string(level) + ".ftns"), t);
    }
    for (const auto& [level, t] : r.features.stuff) {
      WriteTensor(dir / ("stuff_P" + std::to_string(level) + ".ftns"), t);
    }
    WriteTensor(dir / "stuff_probs.ftns", r.stuff_probs);
    std::vector<DetectionRecord> records;
    for (const Detection& d : r.detections) records.push_back({d, std::nullopt});
    for (size_t m = 0; m < r.things.masks.size(); ++m) {
      records[r.things.masks[m].detection_index].mask_index = static_cast<int64_t>(m);
    }
    const std::string json = DetectionsToJson(records);
    WriteFileBytes(dir / "detections.json",
                   std::span(reinterpret_cast<const uint8_t*>(json.data()), json.size()));
    std::error_code ignored;
    fs::remove(dir / "instances.ftns", ignored);
    if (!r.instances.empty()) {
      WriteTensor(dir / "instances.ftns",
                  StackInstances(r.instances, image.height(), image.width()));
    }
  }
  return FormatForwardReport(r);
}

FusionInputs LoadFusionInputs(const RunConfig& config, const FuseArgs& args) {
  FusionInputs inputs;
  std::optional<Tensor> masks;
  if (!args.instances.empty()) masks = ReadTensor(args.instances);
  if (!args.stuff.empty()) inputs.stuff_probs = ReadTensor(args.stuff);
  std::vector<DetectionRecord> records;
  if (!args.detections.empty()) records = ReadDetections(args.detections);

  if (inputs.stuff_probs) {
    inputs.height = inputs.stuff_probs->height();
    inputs.width = inputs.stuff_probs->width();
  } else if (masks) {
    inputs.height = masks->height();
    inputs.width = masks->width();
  } else {
    inputs.height = config.image_size;
    inputs.width = config.image_size;
  }
  if (masks) {
    Require(masks->channels() == 1, ErrorCode::kShapeMismatch,
            "fuse: instance masks must be Nx1xHxW, got " + masks->shape().ToString());
    if (masks->height() != inputs.height || masks->width() != inputs.width) {
      Fail(ErrorCode::kShapeMismatch, "fuse: instance masks " + masks->shape().ToString() +
                                          " do not match stuff probabilities " +
                                          inputs.stuff_probs->shape().ToString());
    }
  }
  const int64_t plane = inputs.height * inputs.width;
  for (size_t i = 0; i < records.size(); ++i) {
    inputs.detections.push_back(records[i].detection);
    if (!records[i].mask_index) continue;
    const int64_t m = *records[i].mask_index;
    Require(masks.has_value() && m >= 0 && m < masks->batch(), ErrorCode::kSchema,
            "fuse: detection " + std::to_string(i) + " references missing mask " +
                std::to_string(m));
    InstanceMask inst;
    inst.category_id = records[i].detection.category_id;
    inst.score = records[i].detection.score;
    inst.detection_index = static_cast<int64_t>(i);
    inst.mask = BinaryMask(inputs.height, inputs.width);
    const float* src = masks->data().data() + m * plane;
    for (int64_t p = 0; p < plane; ++p) inst.mask.bits[static_cast<size_t>(p)] = src[p] >= 0.5f;
    inputs.instances.push_back(std::move(inst));
  }
  return inputs;
}

std::string CmdFuse(const RunConfig& config, const FuseArgs& args) {
  Require(!config.paths.out.empty(), ErrorCode::kConfig, "fuse: an output directory is required");
  const PanopticMap map = Fuse(LoadFusionInputs(config, args), config.fusion);
  const fs::path dir = config.paths.out;
  const ArchiveEntry entry{config.image_id, ArchiveFileName(config.image_id), map};
  WriteArchive(dir / "panoptic.json", dir / "panoptic", std::span(&entry, 1),
               DefaultCategories(config.heads));
  int64_t assigned = 0;
  for (const Segment& s : map.segments) assigned += s.area;
  const double void_fraction =
      1.0 - static_cast<double>(assigned) / static_cast<double>(map.height * map.width);
  char summary[128];
  std::snprintf(summary, sizeof(summary), "segments %zu\nvoid_fraction %.6f\n",
                map.segments.size(), void_fraction);
  return summary;
}

PQStats EvaluateArchives(const ArchiveReader& gt, const ArchiveReader& pred, int workers) {
  std::map<int64_t, size_t> pred_index;
  for (size_t i = 0; i < pred.size(); ++i) pred_index[pred.annotations()[i].image_id] = i;
  std::string missing;
  for (const AnnotationRecord& a : gt.annotations()) {
    if (!pred_index.count(a.image_id)) missing += " " + std::to_string(a.image_id);
  }
  Require(missing.empty(), ErrorCode::kSchema, "no prediction for image_id(s):" + missing);

  const size_t n = gt.size();
  std::vector<PQStats> stats(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < n; i = next++) {
      try {
        const ArchiveItem g = gt.Load(i);
        const ArchiveItem p = pred.Load(pred_index.at(g.annotation.image_id));
        stats[i] = MatchSegments(g.map, p.map);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const size_t threads = std::min(static_cast<size_t>(std::max(workers, 1)), std::max<size_t>(n, 1));
  std::vector<std::thread> pool;
  for (size_t t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return ReduceStats(stats);
}

EvaluateResult CmdEvaluate(const RunConfig& config, const std::string& gt_json,
                           const std::string& gt_dir, const std::string& pred_json,
                           const std::string& pred_dir) {
  const ArchiveReader gt(gt_json, gt_dir);
  const ArchiveReader pred(pred_json, pred_dir);
  EvaluateResult result;
  result.report = ComputePQ(EvaluateArchives(gt, pred, ResolveWorkers(config)), gt.categories());
  result.json = ReportToJson(result.report);
  result.table = FormatReportTable(result.report);
  if (!config.paths.out.empty()) {
    fs::create_directories(config.paths.out);
    WriteFileBytes(fs::path(config.paths.out) / "pq_report.json",
                   std::span(reinterpret_cast<const uint8_t*>(result.json.data()),
                             result.json.size()));
  }
  return result;
}

void CmdColorize(const RunConfig& config, const std::string& panoptic_png,
                 const std::string& out_png) {
  const PanopticMap map = DecodePanopticIds(ReadFileBytes(panoptic_png));
  WriteFileBytes(out_png, EncodeRgbPng(Colorize(map, config.palette_seed)));
}

}  // namespace panoflow
