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

#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "panoflow/panoflow.h"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> seed;
  std::optional<std::string> size;
  std::optional<std::string> workers;
  std::optional<std::string> lambda;
  std::vector<std::string> disabled_flows;
  std::vector<std::string> stages;
  std::optional<std::string> out;
  std::optional<std::string> image;
  std::optional<std::string> checkpoint;
  std::optional<std::string> save_checkpoint;
  std::optional<std::string> image_id;
  std::optional<std::string> palette_seed;
};

int ExitCode(pf_status status) {
  switch (status) {
    case PF_OK:
      return 0;
    case PF_ERR_INVALID_ARGUMENT:
    case PF_ERR_SHAPE_MISMATCH:
    case PF_ERR_CONFIG:
    case PF_ERR_SCHEMA:
      return 2;
    default:
      return 3;
  }
}

int Report(pf_status status) {
  if (status != PF_OK) {
    std::fprintf(stderr, "panoflow: error[%s]: %s\n", pf_status_name(status), pf_last_error());
  }
  return ExitCode(status);
}

class Config {
 public:
  ~Config() { pf_config_destroy(handle_); }

  pf_status Build(const Overrides& o) {
    pf_status s = o.config_path.empty() ? pf_config_create(&handle_)
                                        : pf_config_load(o.config_path.c_str(), &handle_);
    const std::pair<const char*, const std::optional<std::string>*> scalars[] = {
        {"seed", &o.seed},
        {"size", &o.size},
        {"workers", &o.workers},
        {"lambda", &o.lambda},
        {"out", &o.out},
        {"image", &o.image},
        {"checkpoint", &o.checkpoint},
        {"save-checkpoint", &o.save_checkpoint},
        {"image-id", &o.image_id},
        {"palette-seed", &o.palette_seed},
    };
    for (const auto& [key, value] : scalars) {
      if (s == PF_OK && value->has_value()) s = pf_config_set(handle_, key, (*value)->c_str());
    }
    for (const std::string& flow : o.disabled_flows) {
      if (s == PF_OK) s = pf_config_set(handle_, "disable-flow", flow.c_str());
    }
    for (const std::string& stage : o.stages) {
      if (s == PF_OK) s = pf_config_set(handle_, "stages", stage.c_str());
    }
    return s;
  }

  const pf_config* get() const { return handle_; }

 private:
  pf_config* handle_ = nullptr;
};

int PrintAndFree(pf_status status, char* text) {
  if (status == PF_OK && text != nullptr) std::fputs(text, stdout);
  pf_string_free(text);
  return Report(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Panoptic segmentation forward pass, fusion and PQ evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Seed for the random image and weights");
  app.add_option("--size", o.size, "Square image size (multiple of 128)");
  app.add_option("--workers", o.workers, "Evaluation worker threads");
  app.add_option("--lambda", o.lambda, "Stuff loss weight");
  app.add_option("--disable-flow", o.disabled_flows,
                 "Disable a flow: reg_cls, reg_stuff, reg_thing, stuff_thing or all");
  app.add_option("--stages", o.stages, "Stage count as <task>=<n> (cls, reg, stuff, thing)");
  app.add_option("--out", o.out, "Output directory");

  auto* forward = app.add_subcommand("forward", "Run the network and report every tensor");
  forward->add_option("--image", o.image, "FTNS image (1x3xHxW) instead of a seeded one");
  forward->add_option("--checkpoint", o.checkpoint, "Weight manifest to load");
  forward->add_option("--save-checkpoint", o.save_checkpoint, "Write the weights used");

  std::string instances, stuff, detections;
  auto* fuse = app.add_subcommand("fuse", "Merge instances, stuff and boxes into a panoptic map");
  fuse->add_option("--instances", instances, "FTNS instance masks (Nx1xHxW)");
  fuse->add_option("--stuff", stuff, "FTNS stuff probabilities (1xCxHxW)");
  fuse->add_option("--detections", detections, "Detections JSON");
  fuse->add_option("--image-id", o.image_id, "image_id written to the archive");

  std::string gt_json, gt_dir, pred_json, pred_dir;
  auto* evaluate = app.add_subcommand("evaluate", "Panoptic quality of a prediction archive");
  evaluate->add_option("--gt-json", gt_json, "Ground-truth annotation JSON")->required();
  evaluate->add_option("--gt-dir", gt_dir, "Ground-truth PNG directory")->required();
  evaluate->add_option("--pred-json", pred_json, "Prediction annotation JSON")->required();
  evaluate->add_option("--pred-dir", pred_dir, "Prediction PNG directory")->required();

  std::string colorize_in, colorize_out;
  auto* colorize = app.add_subcommand("colorize", "Render a panoptic PNG with per-id colours");
  colorize->add_option("input", colorize_in, "Panoptic PNG")->required();
  colorize->add_option("output", colorize_out, "RGB PNG to write")->required();
  colorize->add_option("--palette-seed", o.palette_seed, "Palette seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Config config;
  if (const pf_status s = config.Build(o); s != PF_OK) return Report(s);

  if (forward->parsed()) {
    char* report = nullptr;
    const pf_status s = pf_run_forward(config.get(), &report);
    return PrintAndFree(s, report);
  }
  if (fuse->parsed()) {
    char* summary = nullptr;
    const pf_status s = pf_run_fuse(config.get(), instances.c_str(), stuff.c_str(),
                                    detections.c_str(), &summary);
    return PrintAndFree(s, summary);
  }
  if (evaluate->parsed()) {
    char* table = nullptr;
    const pf_status s = pf_run_evaluate(config.get(), gt_json.c_str(), gt_dir.c_str(),
                                        pred_json.c_str(), pred_dir.c_str(), nullptr, &table);
    return PrintAndFree(s, table);
  }
  return Report(pf_run_colorize(config.get(), colorize_in.c_str(), colorize_out.c_str()));
}
