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

#ifndef PANOFLOW_CONFIG_H_
#define PANOFLOW_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "panoflow/detection.h"
#include "panoflow/fusion.h"
#include "panoflow/heads.h"
#include "panoflow/panoptic.h"
#include "panoflow/subnets.h"

namespace panoflow {

struct RunPaths {
  std::string image;            // FTNS (1, 3, H, W); empty = seeded random image
  std::string checkpoint;       // manifest JSON; empty = seeded random weights
  std::string save_checkpoint;  // write the weights used by forward here
  std::string out;              // output directory
};

struct RunConfig {
  int64_t image_size = 512;
  uint64_t seed = 0;
  std::optional<int> workers;  // unset: PANOFLOW_WORKERS, then 1
  double loss_lambda = kDefaultLossLambda;
  uint64_t palette_seed = 0;
  int64_t image_id = 0;
  SubnetConfig subnets;
  HeadConfig heads;
  DetectionConfig detection;
  FusionConfig fusion;  // stuff ids and 'other' channel derived from heads
  RunPaths paths;

  // Fills the fusion category mapping from the head layout and checks
  // every field (ErrorCode::kConfig).
  void Finalize();
};

// Unknown keys and wrongly typed values are ErrorCode::kConfig.
RunConfig RunConfigFromJson(const std::string& text);
RunConfig LoadRunConfig(const std::string& path);
std::string RunConfigToJson(const RunConfig& config);

// Flag-style overrides; names as accepted on the command line.
void DisableFlow(RunConfig& config, const std::string& name);
void SetStages(RunConfig& config, const std::string& assignment);  // "<task>=<n>"
void ApplyOverride(RunConfig& config, const std::string& key, const std::string& value);

int ResolveWorkers(const RunConfig& config);

// Thing k -> id k + 1, stuff channel s -> id K + 1 + s.
CategoryTable DefaultCategories(const HeadConfig& heads);

}  // namespace panoflow

#endif  // PANOFLOW_CONFIG_H_
