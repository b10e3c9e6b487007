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

#include "panoflow/heads.h"

#include <algorithm>
#include <cmath>

#include "panoflow/error.h"

namespace panoflow {

namespace {

std::string StuffBlock(int level, int block) {
  return "head.stuff.p" + std::to_string(level) + ".block" + std::to_string(block);
}

int StuffBlockCount(int level) { return level - 2; }

const Tensor& LevelOf(const std::map<int, Tensor>& maps, int level, const char* what) {
  auto it = maps.find(level);
  Require(it != maps.end(), ErrorCode::kInvalidArgument,
          std::string(what) + " features missing level P" + std::to_string(level));
  return it->second;
}

double BilinearSample(const float* plane, int64_t h, int64_t w, double y, double x) {
  if (y < -1.0 || y > static_cast<double>(h) || x < -1.0 || x > static_cast<double>(w)) return 0.0;
  y = std::max(y, 0.0);
  x = std::max(x, 0.0);
  int64_t y0 = static_cast<int64_t>(y);
  int64_t x0 = static_cast<int64_t>(x);
  int64_t y1, x1;
  if (y0 >= h - 1) {
    y0 = y1 = h - 1;
    y = static_cast<double>(y0);
  } else {
    y1 = y0 + 1;
  }
  if (x0 >= w - 1) {
    x0 = x1 = w - 1;
    x = static_cast<double>(x0);
  } else {
    x1 = x0 + 1;
  }
  const double ly = y - static_cast<double>(y0);
  const double lx = x - static_cast<double>(x0);
  const double hy = 1.0 - ly;
  const double hx = 1.0 - lx;
  return hy * hx * plane[y0 * w + x0] + hy * lx * plane[y0 * w + x1] +
         ly * hx * plane[y1 * w + x0] + ly * lx * plane[y1 * w + x1];
}

}  // namespace

void HeadConfig::Validate() const {
  Require(num_anchors >= 1 && num_thing_classes >= 1 && num_stuff_classes >= 1,
          ErrorCode::kConfig, "head class and anchor counts must be >= 1");
  Require(gn_groups >= 1 && stuff_channels % gn_groups == 0, ErrorCode::kConfig,
          "stuff head channels must be divisible by the group-norm group count");
}

std::vector<WeightSpec> HeadWeightSpecs(const HeadConfig& config, int in_channels) {
  config.Validate();
  const int c = in_channels;
  std::vector<WeightSpec> specs;
  const double prior_bias = -std::log((1.0 - 0.01) / 0.01);
  AppendConvSpecs(specs, "head.cls", config.num_anchors * config.num_thing_classes, c, 3,
                  prior_bias);
  AppendConvSpecs(specs, "head.reg", config.num_anchors * 4, c, 3);
  for (int i = 1; i <= 4; ++i) AppendConvSpecs(specs, "head.thing.conv" + std::to_string(i), c, c, 3);
  specs.push_back({"head.thing.deconv.conv", {c, c, 2, 2}, InitKind::kKaimingUniform});
  specs.push_back({"head.thing.deconv.bias", {c}, InitKind::kZeros});
  AppendConvSpecs(specs, "head.thing.output", config.num_thing_classes, c, 1);
  for (int level = 3; level <= 5; ++level) {
    for (int b = 1; b <= StuffBlockCount(level); ++b) {
      const std::string name = StuffBlock(level, b);
      AppendConvSpecs(specs, name, config.stuff_channels, b == 1 ? c : config.stuff_channels, 3);
      specs.push_back({name + ".gn_gamma", {config.stuff_channels}, InitKind::kOnes});
      specs.push_back({name + ".gn_beta", {config.stuff_channels}, InitKind::kZeros});
    }
  }
  AppendConvSpecs(specs, "head.stuff.output", config.num_stuff_classes + 1, config.stuff_channels, 1);
  return specs;
}

ClsRegOutputs RunClsRegHeads(const SubnetFeatures& features, const HeadConfig& config,
                             const WeightStore& weights) {
  const ConvParams cls = weights.Conv("head.cls");
  const ConvParams reg = weights.Conv("head.reg");
  Require(cls.out_channels() == config.num_anchors * config.num_thing_classes &&
              reg.out_channels() == config.num_anchors * 4,
          ErrorCode::kShapeMismatch, "head.cls/head.reg output channels do not match config");
  ClsRegOutputs out;
  for (int level = kMinLevel; level <= kMaxLevel; ++level) {
    out.cls_logits.emplace(level, Conv2d(LevelOf(features.cls, level, "cls"), cls, 1, 1));
    out.box_deltas.emplace(level, Conv2d(LevelOf(features.reg, level, "reg"), reg, 1, 1));
  }
  return out;
}

int AssignRoiLevel(const Box& box) {
  const double scale = std::sqrt(box.Area());
  const double k = std::floor(4.0 + std::log2(scale / 224.0));
  return static_cast<int>(std::clamp(k, 3.0, 5.0));
}

Tensor RoiAlign(const Tensor& feature, const Box& box, double spatial_scale, int out_size) {
  const int64_t channels = feature.channels();
  const int64_t h = feature.height();
  const int64_t w = feature.width();
  const double x0 = box.x1 * spatial_scale - 0.5;
  const double y0 = box.y1 * spatial_scale - 0.5;
  const double bin_w = (box.x2 - static_cast<double>(box.x1)) * spatial_scale / out_size;
  const double bin_h = (box.y2 - static_cast<double>(box.y1)) * spatial_scale / out_size;
  constexpr int kSamples = 2;
  Tensor out(Shape{1, channels, out_size, out_size});
  for (int64_t c = 0; c < channels; ++c) {
    const float* plane = feature.plane(0, c);
    float* dst = out.plane(0, c);
    for (int by = 0; by < out_size; ++by) {
      for (int bx = 0; bx < out_size; ++bx) {
        double sum = 0.0;
        for (int sy = 0; sy < kSamples; ++sy) {
          const double y = y0 + by * bin_h + (sy + 0.5) * bin_h / kSamples;
          for (int sx = 0; sx < kSamples; ++sx) {
            const double x = x0 + bx * bin_w + (sx + 0.5) * bin_w / kSamples;
            sum += BilinearSample(plane, h, w, y, x);
          }
        }
        dst[by * out_size + bx] = static_cast<float>(sum / (kSamples * kSamples));
      }
    }
  }
  return out;
}

ThingHeadResult RunThingHead(const SubnetFeatures& features, std::span<const Detection> detections,
                             const HeadConfig& config, const WeightStore& weights) {
  ThingHeadResult result;
  std::vector<size_t> kept;
  std::vector<Tensor> crops;
  for (size_t i = 0; i < detections.size(); ++i) {
    const Detection& d = detections[i];
    if (!(d.box.Area() >= 1.0)) {
      result.warnings.push_back("detection " + std::to_string(i) +
                                ": degenerate box (area < 1 px) skipped");
      continue;
    }
    Require(d.category_id >= 1 && d.category_id <= config.num_thing_classes,
            ErrorCode::kInvalidArgument,
            "thing head: category " + std::to_string(d.category_id) + " is not a thing class");
    const int level = AssignRoiLevel(d.box);
    const Tensor& feature = LevelOf(features.thing, level, "thing");
    crops.push_back(RoiAlign(feature, d.box, std::ldexp(1.0, -level), kRoiSize));
    kept.push_back(i);
  }
  if (kept.empty()) return result;

  // RoIs run as one batch; batch items are independent.
  const int64_t channels = crops.front().channels();
  Tensor x(Shape{static_cast<int64_t>(kept.size()), channels, kRoiSize, kRoiSize});
  for (size_t n = 0; n < crops.size(); ++n) {
    std::copy(crops[n].data().begin(), crops[n].data().end(),
              x.data().begin() + static_cast<int64_t>(n) * crops[n].numel());
  }
  crops.clear();
  for (int i = 1; i <= 4; ++i) {
    x = Activate(Conv2d(x, weights.Conv("head.thing.conv" + std::to_string(i)), 1, 1),
                 Activation::kRelu);
  }
  x = Activate(Deconv2x(x, weights.Conv("head.thing.deconv")), Activation::kRelu);
  const ConvParams output = weights.Conv("head.thing.output");
  Require(output.out_channels() == config.num_thing_classes, ErrorCode::kShapeMismatch,
          "head.thing.output channels do not match num_thing_classes");
  const Tensor logits = Conv2d(x, output, 1, 0);

  for (size_t n = 0; n < kept.size(); ++n) {
    const Detection& d = detections[kept[n]];
    RoiMask m;
    m.box = d.box;
    m.category_id = d.category_id;
    m.score = d.score;
    m.detection_index = kept[n];
    const float* plane = logits.plane(static_cast<int64_t>(n), d.category_id - 1);
    for (int i = 0; i < kMaskSize * kMaskSize; ++i) {
      m.mask[static_cast<size_t>(i)] =
          static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(plane[i]))));
    }
    result.masks.push_back(m);
  }
  return result;
}

Tensor RunStuffHead(const SubnetFeatures& features, const HeadConfig& config,
                    const WeightStore& weights) {
  config.Validate();
  Tensor summed;
  for (int level = 3; level <= 5; ++level) {
    Tensor x = LevelOf(features.stuff, level, "stuff");
    for (int b = 1; b <= StuffBlockCount(level); ++b) {
      const std::string name = StuffBlock(level, b);
      x = Conv2d(x, weights.Conv(name), 1, 1);
      x = GroupNorm(x, config.gn_groups, weights.Vector(name + ".gn_gamma"),
                    weights.Vector(name + ".gn_beta"));
      x = Activate(x, Activation::kRelu);
      x = BilinearResize(x, x.height() * 2, x.width() * 2);
    }
    if (level == 3) {
      summed = std::move(x);
    } else {
      if (!(summed.shape() == x.shape())) {
        Fail(ErrorCode::kShapeMismatch, "stuff head: level P" + std::to_string(level) +
                                            " upsampled to " + x.shape().ToString() +
                                            ", expected " + summed.shape().ToString());
      }
      AddInPlace(summed, x);
    }
  }
  const ConvParams output = weights.Conv("head.stuff.output");
  Require(output.out_channels() == config.num_stuff_classes + 1, ErrorCode::kShapeMismatch,
          "head.stuff.output channels do not match num_stuff_classes + 1");
  Tensor logits = Conv2d(summed, output, 1, 0);
  logits = BilinearResize(logits, logits.height() * 4, logits.width() * 4);
  return Activate(logits, Activation::kSoftmaxChannel);
}

}  // namespace panoflow
