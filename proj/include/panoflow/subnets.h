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

#ifndef PANOFLOW_SUBNETS_H_
#define PANOFLOW_SUBNETS_H_

#include <map>
#include <vector>

#include "panoflow/backbone.h"
#include "panoflow/tensor.h"
#include "panoflow/weights.h"

namespace panoflow {

inline constexpr double kDefaultLossLambda = 0.25;

struct FlowFlags {
  bool reg_to_cls = true;
  bool reg_to_stuff = true;
  bool reg_to_thing = true;
  bool stuff_to_thing = true;

  static FlowFlags None() { return {false, false, false, false}; }
};

struct SubnetConfig {
  int cls_stages = 4;
  int reg_stages = 4;
  int stuff_stages = 4;
  int thing_stages = 1;
  FlowFlags flows;
  int channels = kPyramidChannels;

  void Validate() const;
};

// Final-stage features per level. cls/reg cover P3..P7, thing/stuff P3..P5.
struct SubnetFeatures {
  std::map<int, Tensor> cls;
  std::map<int, Tensor> reg;
  std::map<int, Tensor> thing;
  std::map<int, Tensor> stuff;
};

// Entries (weights are shared across pyramid levels):
//   subnet.{cls,reg,stuff,thing}.stage{j}   3x3 conv, followed by ReLU
//   flow.reg_cls.stage{j}, flow.reg_stuff.stage{j}   3x3 adapters
//   flow.reg_thing.stage1, flow.stuff_thing.stage1   3x3 adapters
// Adapter entries are listed for every stage so one checkpoint serves any
// combination of flow flags.
std::vector<WeightSpec> SubnetWeightSpecs(const SubnetConfig& config);

// Per level i and stage j:
//   reg(j)   = relu(conv(reg(j-1)))
//   cls(j)   = relu(conv(cls(j-1)   + adapt_reg_cls_j(reg(j))))
//   stuff(j) = relu(conv(stuff(j-1) + adapt_reg_stuff_j(reg(j))))
//   thing(1) = relu(conv(P_i + adapt_stuff_thing(stuff(last)) + adapt_reg_thing(reg(last))))
// with every stage-0 feature equal to P_i. A disabled flow drops its term, as
// does a reg->X flow at a stage deeper than the reg sub-network. Thing stages
// beyond the first are plain conv + ReLU.
SubnetFeatures RunSubnets(const FeaturePyramid& pyramid, const SubnetConfig& config,
                          const WeightStore& weights);

// (cls + reg + thing) + lambda * stuff. Throws on NaN or negative components.
double LossCompose(double l_cls, double l_reg, double l_thing, double l_stuff,
                   double lambda = kDefaultLossLambda);

}  // namespace panoflow

#endif  // PANOFLOW_SUBNETS_H_
