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

#ifndef PANOFLOW_PIPELINE_H_
#define PANOFLOW_PIPELINE_H_

#include <string>
#include <vector>

#include "panoflow/backbone.h"
#include "panoflow/config.h"
#include "panoflow/fusion.h"
#include "panoflow/heads.h"
#include "panoflow/panoptic_io.h"
#include "panoflow/pq.h"
#include "panoflow/subnets.h"
#include "panoflow/weights.h"

namespace panoflow {

std::vector<WeightSpec> ModelWeightSpecs(const RunConfig& config);

// Uniform in [-1, 1) from the "image" stream of `seed`.
Tensor SeededImage(int64_t size, uint64_t seed);

// Checkpoint when configured, seeded init otherwise.
WeightStore ResolveWeights(const RunConfig& config);

struct ForwardResult {
  Tensor image;
  FeaturePyramid pyramid;
  SubnetFeatures features;
  ClsRegOutputs heads;
  std::vector<Detection> detections;
  ThingHeadResult things;
  std::vector<InstanceMask> instances;  // pasted, in things.masks order
  Tensor stuff_probs;
};

ForwardResult RunForward(const RunConfig& config, const Tensor& image, const WeightStore& weights);

// One line per tensor: name, shape, mean, max.
std::string FormatForwardReport(const ForwardResult& result);

// Runs forward and writes the dumps into config.paths.out when set.
std::string CmdForward(const RunConfig& config);

struct FuseArgs {
  std::string instances;   // FTNS (N, 1, H, W); optional
  std::string stuff;       // FTNS (1, C, H, W); optional
  std::string detections;  // detections JSON; optional
};

FusionInputs LoadFusionInputs(const RunConfig& config, const FuseArgs& args);

// Writes <out>/panoptic.json and <out>/panoptic/<image id>.png.
std::string CmdFuse(const RunConfig& config, const FuseArgs& args);

// Per-image statistics over `workers` threads, folded in image_id order.
PQStats EvaluateArchives(const ArchiveReader& gt, const ArchiveReader& pred, int workers);

struct EvaluateResult {
  PQReport report;
  std::string json;
  std::string table;
};

// Writes <out>/pq_report.json when an output directory is configured.
EvaluateResult CmdEvaluate(const RunConfig& config, const std::string& gt_json,
                           const std::string& gt_dir, const std::string& pred_json,
                           const std::string& pred_dir);

void CmdColorize(const RunConfig& config, const std::string& panoptic_png,
                 const std::string& out_png);

}  // namespace panoflow

#endif  // PANOFLOW_PIPELINE_H_
