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

#include "panoflow/config.h"

#include <charconv>
#include <cstdlib>
#include <thread>

#include "json.hpp"
#include "panoflow/error.h"
#include "panoflow/tensor_io.h"

namespace panoflow {

namespace {

using nlohmann::json;

void CheckKeys(const json& object, const std::string& where,
               std::initializer_list<const char*> allowed) {
  Require(object.is_object(), ErrorCode::kConfig, where + " must be a JSON object");
  for (const auto& item : object.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    Require(known, ErrorCode::kConfig, "unknown config key '" + where + "." + item.key() + "'");
  }
}

template <typename T>
void Read(const json& object, const char* key, T& out) {
  if (object.contains(key)) out = object.at(key).get<T>();
}

void ReadFlows(const json& j, FlowFlags& flows) {
  CheckKeys(j, "subnets.flows", {"reg_cls", "reg_stuff", "reg_thing", "stuff_thing"});
  Read(j, "reg_cls", flows.reg_to_cls);
  Read(j, "reg_stuff", flows.reg_to_stuff);
  Read(j, "reg_thing", flows.reg_to_thing);
  Read(j, "stuff_thing", flows.stuff_to_thing);
}

int64_t ParseInt(const std::string& key, const std::string& value) {
  int64_t out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  Require(ec == std::errc() && ptr == end && !value.empty(), ErrorCode::kConfig,
          key + ": expected an integer, got '" + value + "'");
  return out;
}

double ParseDouble(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double out = std::strtod(value.c_str(), &end);
  Require(!value.empty() && end == value.c_str() + value.size(), ErrorCode::kConfig,
          key + ": expected a number, got '" + value + "'");
  return out;
}

}  // namespace

void RunConfig::Finalize() {
  Require(image_size >= 128 && image_size % 128 == 0, ErrorCode::kConfig,
          "image_size must be a positive multiple of 128, got " + std::to_string(image_size));
  Require(!workers || *workers >= 1, ErrorCode::kConfig, "workers must be >= 1");
  Require(loss_lambda >= 0.0, ErrorCode::kConfig, "loss_lambda must be >= 0");
  Require(detection.score_thresh >= 0.0f && detection.score_thresh <= 1.0f, ErrorCode::kConfig,
          "detection.score_thresh must lie in [0, 1]");
  Require(detection.nms_thresh >= 0.0 && detection.nms_thresh <= 1.0, ErrorCode::kConfig,
          "detection.nms_thresh must lie in [0, 1]");
  Require(detection.top_k >= 1 && detection.pre_nms_top_n >= 1, ErrorCode::kConfig,
          "detection.top_k and detection.pre_nms_top_n must be >= 1");
  subnets.Validate();
  heads.Validate();
  fusion.other_class_id = heads.num_stuff_classes;
  fusion.stuff_category_ids.clear();
  for (int s = 0; s <= heads.num_stuff_classes; ++s) {
    fusion.stuff_category_ids.push_back(heads.num_thing_classes + 1 + s);
  }
  fusion.Validate();
}

RunConfig RunConfigFromJson(const std::string& text) {
  RunConfig config;
  try {
    const json doc = json::parse(text);
    CheckKeys(doc, "config",
              {"image_size", "seed", "workers", "loss_lambda", "palette_seed", "image_id",
               "subnets", "heads", "detection", "fusion", "paths"});
    Read(doc, "image_size", config.image_size);
    Read(doc, "seed", config.seed);
    if (doc.contains("workers")) config.workers = doc.at("workers").get<int>();
    Read(doc, "loss_lambda", config.loss_lambda);
    Read(doc, "palette_seed", config.palette_seed);
    Read(doc, "image_id", config.image_id);
    if (doc.contains("subnets")) {
      const json& j = doc.at("subnets");
      CheckKeys(j, "subnets",
                {"cls_stages", "reg_stages", "stuff_stages", "thing_stages", "flows", "channels"});
      Read(j, "cls_stages", config.subnets.cls_stages);
      Read(j, "reg_stages", config.subnets.reg_stages);
      Read(j, "stuff_stages", config.subnets.stuff_stages);
      Read(j, "thing_stages", config.subnets.thing_stages);
      Read(j, "channels", config.subnets.channels);
      if (j.contains("flows")) ReadFlows(j.at("flows"), config.subnets.flows);
    }
    if (doc.contains("heads")) {
      const json& j = doc.at("heads");
      CheckKeys(j, "heads",
                {"num_thing_classes", "num_stuff_classes", "stuff_channels", "gn_groups"});
      Read(j, "num_thing_classes", config.heads.num_thing_classes);
      Read(j, "num_stuff_classes", config.heads.num_stuff_classes);
      Read(j, "stuff_channels", config.heads.stuff_channels);
      Read(j, "gn_groups", config.heads.gn_groups);
    }
    if (doc.contains("detection")) {
      const json& j = doc.at("detection");
      CheckKeys(j, "detection", {"score_thresh", "nms_thresh", "top_k", "pre_nms_top_n"});
      Read(j, "score_thresh", config.detection.score_thresh);
      Read(j, "nms_thresh", config.detection.nms_thresh);
      Read(j, "top_k", config.detection.top_k);
      Read(j, "pre_nms_top_n", config.detection.pre_nms_top_n);
    }
    if (doc.contains("fusion")) {
      const json& j = doc.at("fusion");
      CheckKeys(j, "fusion",
                {"score_thresh", "overlap_thresh", "stuff_area_limit", "box_fill_overlap"});
      Read(j, "score_thresh", config.fusion.score_thresh);
      Read(j, "overlap_thresh", config.fusion.overlap_thresh);
      Read(j, "stuff_area_limit", config.fusion.stuff_area_limit);
      Read(j, "box_fill_overlap", config.fusion.box_fill_overlap);
    }
    if (doc.contains("paths")) {
      const json& j = doc.at("paths");
      CheckKeys(j, "paths", {"image", "checkpoint", "save_checkpoint", "out"});
      Read(j, "image", config.paths.image);
      Read(j, "checkpoint", config.paths.checkpoint);
      Read(j, "save_checkpoint", config.paths.save_checkpoint);
      Read(j, "out", config.paths.out);
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfig, std::string("config: ") + e.what());
  }
  config.Finalize();
  return config;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::vector<uint8_t> bytes;
  try {
    bytes = ReadFileBytes(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  try {
    return RunConfigFromJson(std::string(bytes.begin(), bytes.end()));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string RunConfigToJson(const RunConfig& c) {
  json doc = {
      {"image_size", c.image_size},
      {"seed", c.seed},
      {"loss_lambda", c.loss_lambda},
      {"palette_seed", c.palette_seed},
      {"image_id", c.image_id},
      {"subnets",
       {{"cls_stages", c.subnets.cls_stages},
        {"reg_stages", c.subnets.reg_stages},
        {"stuff_stages", c.subnets.stuff_stages},
        {"thing_stages", c.subnets.thing_stages},
        {"channels", c.subnets.channels},
        {"flows",
         {{"reg_cls", c.subnets.flows.reg_to_cls},
          {"reg_stuff", c.subnets.flows.reg_to_stuff},
          {"reg_thing", c.subnets.flows.reg_to_thing},
          {"stuff_thing", c.subnets.flows.stuff_to_thing}}}}},
      {"heads",
       {{"num_thing_classes", c.heads.num_thing_classes},
        {"num_stuff_classes", c.heads.num_stuff_classes},
        {"stuff_channels", c.heads.stuff_channels},
        {"gn_groups", c.heads.gn_groups}}},
      {"detection",
       {{"score_thresh", c.detection.score_thresh},
        {"nms_thresh", c.detection.nms_thresh},
        {"top_k", c.detection.top_k},
        {"pre_nms_top_n", c.detection.pre_nms_top_n}}},
      {"fusion",
       {{"score_thresh", c.fusion.score_thresh},
        {"overlap_thresh", c.fusion.overlap_thresh},
        {"stuff_area_limit", c.fusion.stuff_area_limit},
        {"box_fill_overlap", c.fusion.box_fill_overlap}}},
      {"paths",
       {{"image", c.paths.image},
        {"checkpoint", c.paths.checkpoint},
        {"save_checkpoint", c.paths.save_checkpoint},
        {"out", c.paths.out}}},
  };
  if (c.workers) doc["workers"] = *c.workers;
  return doc.dump(2);
}

void DisableFlow(RunConfig& config, const std::string& name) {
  FlowFlags& f = config.subnets.flows;
  if (name == "reg_cls") {
    f.reg_to_cls = false;
  } else if (name == "reg_stuff") {
    f.reg_to_stuff = false;
  } else if (name == "reg_thing") {
    f.reg_to_thing = false;
  } else if (name == "stuff_thing") {
    f.stuff_to_thing = false;
  } else if (name == "all") {
    f = FlowFlags::None();
  } else {
    Fail(ErrorCode::kConfig, "unknown flow '" + name +
                                 "' (expected reg_cls, reg_stuff, reg_thing, stuff_thing or all)");
  }
}

void SetStages(RunConfig& config, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  Require(eq != std::string::npos, ErrorCode::kConfig,
          "--stages expects <task>=<n>, got '" + assignment + "'");
  const std::string task = assignment.substr(0, eq);
  const int64_t n = ParseInt("--stages " + task, assignment.substr(eq + 1));
  Require(n >= 0 && n <= 16, ErrorCode::kConfig, "--stages " + task + ": out of range");
  const int stages = static_cast<int>(n);
  if (task == "cls") {
    config.subnets.cls_stages = stages;
  } else if (task == "reg") {
    config.subnets.reg_stages = stages;
  } else if (task == "stuff") {
    config.subnets.stuff_stages = stages;
  } else if (task == "thing") {
    config.subnets.thing_stages = stages;
  } else {
    Fail(ErrorCode::kConfig, "unknown task '" + task + "' (expected cls, reg, stuff or thing)");
  }
}

void ApplyOverride(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "seed") {
    const int64_t seed = ParseInt(key, value);
    Require(seed >= 0, ErrorCode::kConfig, "seed must be >= 0");
    config.seed = static_cast<uint64_t>(seed);
  } else if (key == "size") {
    config.image_size = ParseInt(key, value);
  } else if (key == "workers") {
    config.workers = static_cast<int>(ParseInt(key, value));
  } else if (key == "lambda") {
    config.loss_lambda = ParseDouble(key, value);
  } else if (key == "disable-flow") {
    DisableFlow(config, value);
  } else if (key == "stages") {
    SetStages(config, value);
  } else if (key == "out") {
    config.paths.out = value;
  } else if (key == "image") {
    config.paths.image = value;
  } else if (key == "checkpoint") {
    config.paths.checkpoint = value;
  } else if (key == "save-checkpoint") {
    config.paths.save_checkpoint = value;
  } else if (key == "image-id") {
    config.image_id = ParseInt(key, value);
  } else if (key == "palette-seed") {
    config.palette_seed = static_cast<uint64_t>(ParseInt(key, value));
  } else {
    Fail(ErrorCode::kConfig, "unknown override '" + key + "'");
  }
  config.Finalize();
}

int ResolveWorkers(const RunConfig& config) {
  if (config.workers) return *config.workers;
  if (const char* env = std::getenv("PANOFLOW_WORKERS"); env != nullptr && *env != '\0') {
    const int64_t n = ParseInt("PANOFLOW_WORKERS", env);
    Require(n >= 1, ErrorCode::kConfig, "PANOFLOW_WORKERS must be >= 1");
    return static_cast<int>(n);
  }
  return 1;
}

CategoryTable DefaultCategories(const HeadConfig& heads) {
  std::vector<Category> categories;
  for (int k = 0; k < heads.num_thing_classes; ++k) {
    categories.push_back({k + 1, true, "thing_" + std::to_string(k)});
  }
  for (int s = 0; s < heads.num_stuff_classes; ++s) {
    categories.push_back({heads.num_thing_classes + 1 + s, false, "stuff_" + std::to_string(s)});
  }
  return CategoryTable(std::move(categories));
}

}  // namespace panoflow
