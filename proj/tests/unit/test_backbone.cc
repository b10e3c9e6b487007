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

#include "doctest.h"
#include "panoflow/backbone.h"
#include "panoflow/weights.h"
#include "test_util.h"

using panoflow::ErrorCode;
using panoflow::FeaturePyramid;
using panoflow::PyramidTask;
using panoflow::Shape;
using panoflow::Tensor;
using testutil::CodeOf;

namespace {

const panoflow::WeightStore& Weights() {
  static const panoflow::WeightStore store =
      panoflow::InitWeights(panoflow::BackboneWeightSpecs(), 5);
  return store;
}

}  // namespace

TEST_SUITE("backbone") {

TEST_CASE("128 input gives 1x1 P7") {
  const FeaturePyramid p = panoflow::BuildPyramid(testutil::RandomTensor(Shape{1, 3, 128, 128}, 1),
                                                  Weights());
  REQUIRE(p.levels.size() == 5);
  for (int level = 3; level <= 7; ++level) {
    const int64_t side = 128 >> level;
    CHECK(p.level(level).shape() == Shape{1, 256, side, side});
  }
}

TEST_CASE("shape contract over rectangular multiples of 128") {
  const std::pair<int64_t, int64_t> sizes[] = {{128, 256}, {256, 128}, {384, 128}};
  for (const auto& [h, w] : sizes) {
    const FeaturePyramid p =
        panoflow::BuildPyramid(testutil::RandomTensor(Shape{1, 3, h, w}, h + w), Weights());
    for (int level = 3; level <= 7; ++level) {
      CHECK(p.level(level).shape() == Shape{1, 256, h >> level, w >> level});
    }
  }
  const FeaturePyramid narrow =
      panoflow::BuildPyramid(testutil::RandomTensor(Shape{2, 3, 128, 128}, 3), Weights());
  const FeaturePyramid wide =
      panoflow::BuildPyramid(testutil::RandomTensor(Shape{2, 3, 128, 256}, 3), Weights());
  for (int level = 3; level <= 7; ++level) {
    CHECK(wide.level(level).width() == 2 * narrow.level(level).width());
    CHECK(wide.level(level).batch() == 2);
  }
}

TEST_CASE("indivisible input asks for padding") {
  try {
    panoflow::BuildPyramid(Tensor(Shape{1, 3, 100, 128}), Weights());
    FAIL("expected an error");
  } catch (const panoflow::Error& e) {
    CHECK(e.code() == ErrorCode::kShapeMismatch);
    CHECK(std::string(e.what()).find("pad") != std::string::npos);
  }
  CHECK(CodeOf([] { panoflow::BuildPyramid(Tensor(Shape{1, 1, 128, 128}), Weights()); }) ==
        ErrorCode::kShapeMismatch);
}

TEST_CASE("zero lateral weights leave bias-only maps") {
  panoflow::WeightStore store = Weights();
  for (int level = 3; level <= 5; ++level) {
    store.Zero("fpn.lateral" + std::to_string(level) + ".conv");
    panoflow::WeightEntry bias = store.Get("fpn.output" + std::to_string(level) + ".bias");
    bias.values = testutil::RandomVector(bias.values.size(), 50 + level);
    store.Set("fpn.output" + std::to_string(level) + ".bias", bias);
  }
  const FeaturePyramid p =
      panoflow::BuildPyramid(testutil::RandomTensor(Shape{1, 3, 128, 128}, 9), store);
  for (int level = 3; level <= 5; ++level) {
    const Tensor& t = p.level(level);
    const std::vector<float> bias = store.Vector("fpn.output" + std::to_string(level) + ".bias");
    for (int64_t c = 0; c < t.channels(); ++c) {
      for (int64_t i = 0; i < t.height() * t.width(); ++i) {
        REQUIRE(t.plane(0, c)[i] == bias[static_cast<size_t>(c)]);
      }
    }
  }
}

TEST_CASE("level selection") {
  const FeaturePyramid p = testutil::SyntheticPyramid(4, 8, 1);
  CHECK(panoflow::SelectLevels(p, PyramidTask::kDetection) == std::vector<int>{3, 4, 5, 6, 7});
  CHECK(panoflow::SelectLevels(p, PyramidTask::kSegmentation) == std::vector<int>{3, 4, 5});
  FeaturePyramid partial = p;
  partial.levels.erase(6);
  CHECK(CodeOf([&] { partial.level(6); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([&] { panoflow::SelectLevels(partial, PyramidTask::kDetection); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("pyramid is deterministic") {
  const Tensor image = testutil::RandomTensor(Shape{1, 3, 128, 128}, 4);
  const FeaturePyramid a = panoflow::BuildPyramid(image, Weights());
  const FeaturePyramid b = panoflow::BuildPyramid(image, Weights());
  for (int level = 3; level <= 7; ++level) {
    CHECK(testutil::BitEqual(a.level(level).data(), b.level(level).data()));
  }
}

}  // TEST_SUITE
