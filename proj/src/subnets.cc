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

#include "panoflow/subnets.h"

#include <cmath>
#include <string>

#include "panoflow/error.h"

namespace panoflow {

namespace {

std::string StageName(const char* task, int stage) {
  return std::string("subnet.") + task + ".stage" + std::to_string(stage);
}

std::string FlowName(const char* flow, int stage) {
  return std::string("flow.") + flow + ".stage" + std::to_string(stage);
}

Tensor Phi(const Tensor& x, const WeightStore& weights, const std::string& name) {
  return Activate(Conv2d(x, weights.Conv(name), 1, 1), Activation::kRelu);
}

Tensor Adapt(const Tensor& x, const WeightStore& weights, const std::string& name) {
  return Conv2d(x, weights.Conv(name), 1, 1);
}

// Runs one level. `segmentation` selects whether thing/stuff are computed.
void RunLevel(const Tensor& p, bool segmentation, const SubnetConfig& config,
              const WeightStore& weights, Tensor& cls_out, Tensor& reg_out, Tensor* thing_out,
              Tensor* stuff_out) {
  std::vector<Tensor> reg_stages;
  reg_stages.reserve(static_cast<size_t>(config.reg_stages));
  Tensor reg = p;
  for (int j = 1; j <= config.reg_stages; ++j) {
    reg = Phi(reg, weights, StageName("reg", j));
    reg_stages.push_back(reg);
  }
  auto reg_at = [&](int j) -> const Tensor* {
    return j <= config.reg_stages ? &reg_stages[static_cast<size_t>(j - 1)] : nullptr;
  };

  Tensor cls = p;
  for (int j = 1; j <= config.cls_stages; ++j) {
    Tensor in = cls;
    if (config.flows.reg_to_cls && reg_at(j) != nullptr) {
      AddInPlace(in, Adapt(*reg_at(j), weights, FlowName("reg_cls", j)));
    }
    cls = Phi(in, weights, StageName("cls", j));
  }
  cls_out = std::move(cls);
  reg_out = reg;
  if (!segmentation) return;

  Tensor stuff = p;
  for (int j = 1; j <= config.stuff_stages; ++j) {
    Tensor in = stuff;
    if (config.flows.reg_to_stuff && reg_at(j) != nullptr) {
      AddInPlace(in, Adapt(*reg_at(j), weights, FlowName("reg_stuff", j)));
    }
    stuff = Phi(in, weights, StageName("stuff", j));
  }

  Tensor thing = p;
  for (int j = 1; j <= config.thing_stages; ++j) {
    Tensor in = thing;
    if (j == 1) {
      if (config.flows.stuff_to_thing) {
        AddInPlace(in, Adapt(stuff, weights, FlowName("stuff_thing", 1)));
      }
      if (config.flows.reg_to_thing) {
        AddInPlace(in, Adapt(reg, weights, FlowName("reg_thing", 1)));
      }
    }
    thing = Phi(in, weights, StageName("thing", j));
  }
  *thing_out = std::move(thing);
  *stuff_out = std::move(stuff);
}

}  // namespace

void SubnetConfig::Validate() const {
  Require(cls_stages >= 0 && reg_stages >= 0 && stuff_stages >= 0 && thing_stages >= 0,
          ErrorCode::kConfig, "subnet stage counts must be >= 0");
  Require(channels >= 1, ErrorCode::kConfig, "subnet channels must be >= 1");
}

std::vector<WeightSpec> SubnetWeightSpecs(const SubnetConfig& config) {
  config.Validate();
  const int c = config.channels;
  std::vector<WeightSpec> specs;
  for (int j = 1; j <= config.reg_stages; ++j) AppendConvSpecs(specs, StageName("reg", j), c, c, 3);
  for (int j = 1; j <= config.cls_stages; ++j) {
    AppendConvSpecs(specs, StageName("cls", j), c, c, 3);
    AppendConvSpecs(specs, FlowName("reg_cls", j), c, c, 3);
  }
  for (int j = 1; j <= config.stuff_stages; ++j) {
    AppendConvSpecs(specs, StageName("stuff", j), c, c, 3);
    AppendConvSpecs(specs, FlowName("reg_stuff", j), c, c, 3);
  }
  for (int j = 1; j <= config.thing_stages; ++j) AppendConvSpecs(specs, StageName("thing", j), c, c, 3);
  AppendConvSpecs(specs, FlowName("reg_thing", 1), c, c, 3);
  AppendConvSpecs(specs, FlowName("stuff_thing", 1), c, c, 3);
  return specs;
}

SubnetFeatures RunSubnets(const FeaturePyramid& pyramid, const SubnetConfig& config,
                          const WeightStore& weights) {
  config.Validate();
  SubnetFeatures out;
  const std::vector<int> seg_levels = SelectLevels(pyramid, PyramidTask::kSegmentation);
  for (int level : SelectLevels(pyramid, PyramidTask::kDetection)) {
    const Tensor& p = pyramid.level(level);
    Require(p.channels() == config.channels, ErrorCode::kShapeMismatch,
            "run_subnets: P" + std::to_string(level) + " has " + std::to_string(p.channels()) +
                " channels, config expects " + std::to_string(config.channels));
    const bool segmentation = level <= seg_levels.back();
    Tensor cls, reg, thing, stuff;
    RunLevel(p, segmentation, config, weights, cls, reg, &thing, &stuff);
    out.cls.emplace(level, std::move(cls));
    out.reg.emplace(level, std::move(reg));
    if (segmentation) {
      out.thing.emplace(level, std::move(thing));
      out.stuff.emplace(level, std::move(stuff));
    }
  }
  return out;
}

double LossCompose(double l_cls, double l_reg, double l_thing, double l_stuff, double lambda) {
  for (double v : {l_cls, l_reg, l_thing, l_stuff, lambda}) {
    Require(!std::isnan(v), ErrorCode::kInvalidArgument, "loss_compose: NaN input");
    Require(std::isfinite(v) && v >= 0.0, ErrorCode::kInvalidArgument,
            "loss_compose: components must be finite and >= 0");
  }
  return (l_cls + l_reg + l_thing) + lambda * l_stuff;
}

}  // namespace panoflow
