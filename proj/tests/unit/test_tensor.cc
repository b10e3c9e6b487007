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
#include <numeric>

#include "doctest.h"
#include "kernels_reference.h"
#include "panoflow/tensor.h"
#include "test_util.h"

using panoflow::Activation;
using panoflow::ConvParams;
using panoflow::ErrorCode;
using panoflow::Shape;
using panoflow::Tensor;
using testutil::BitEqual;
using testutil::CodeOf;
using testutil::RandomTensor;
using testutil::RandomVector;

TEST_SUITE("tensor") {

TEST_CASE("tensor rejects zero dims and mismatched data") {
  CHECK(CodeOf([] { Tensor t(Shape{1, 0, 2, 2}); }) == ErrorCode::kShapeMismatch);
  CHECK(CodeOf([] { Tensor t(Shape{1, 1, 2, 2}, std::vector<float>(3)); }) ==
        ErrorCode::kShapeMismatch);
  Tensor t(Shape{2, 3, 4, 5}, 1.5f);
  CHECK(t.numel() == 120);
  CHECK(t.shape().ToString() == "2x3x4x5");
}

TEST_CASE("conv2d counts overlapped taps") {
  Tensor in(Shape{1, 1, 3, 3}, 1.0f);
  ConvParams p{Tensor(Shape{1, 1, 3, 3}, 1.0f), {0.0f}};
  const Tensor out = panoflow::Conv2d(in, p, 1, 1);
  CHECK(out.shape() == Shape{1, 1, 3, 3});
  CHECK(out.at(0, 0, 1, 1) == 9.0f);
  CHECK(out.at(0, 0, 0, 0) == 4.0f);
  CHECK(out.at(0, 0, 0, 1) == 6.0f);
}

TEST_CASE("conv2d with a dirac kernel is the identity") {
  const Tensor in = RandomTensor(Shape{2, 5, 9, 7}, 3);
  ConvParams p{Tensor(Shape{5, 5, 3, 3}), std::vector<float>(5, 0.0f)};
  for (int c = 0; c < 5; ++c) p.weights.at(c, c, 1, 1) = 1.0f;
  CHECK(BitEqual(panoflow::Conv2d(in, p, 1, 1).data(), in.data()));
}

TEST_CASE("conv2d matches the loop reference bitwise") {
  struct Case {
    Shape in;
    int64_t out_ch, k;
    int stride, pad;
  };
  const Case cases[] = {
      {{1, 4, 8, 8}, 3, 3, 1, 1},    {{1, 4, 8, 8}, 5, 1, 1, 0},   {{2, 3, 11, 13}, 6, 3, 2, 1},
      {{1, 20, 9, 17}, 9, 3, 1, 1},  {{1, 33, 16, 16}, 7, 3, 2, 1}, {{1, 2, 5, 6}, 3, 2, 1, 0},
      {{1, 17, 12, 19}, 4, 3, 3, 1}, {{1, 8, 3, 3}, 2, 3, 1, 0},    {{1, 1, 1, 1}, 1, 1, 1, 0},
  };
  uint64_t seed = 10;
  for (const Case& c : cases) {
    CAPTURE(c.in.ToString());
    const Tensor in = RandomTensor(c.in, seed++);
    ConvParams p{RandomTensor(Shape{c.out_ch, c.in.channels, c.k, c.k}, seed++),
                 RandomVector(static_cast<size_t>(c.out_ch), seed++)};
    const Tensor got = panoflow::Conv2d(in, p, c.stride, c.pad);
    const oracle::Dense want = oracle::Conv2d(testutil::ToDense(in), testutil::ToDense(p.weights),
                                              p.bias, c.stride, c.pad);
    CHECK(got.shape() == Shape{want.n, want.c, want.h, want.w});
    CHECK(BitEqual(got.data(), want.v));
  }
}

TEST_CASE("conv2d is linear") {
  const Tensor x = RandomTensor(Shape{1, 6, 10, 10}, 40);
  const Tensor y = RandomTensor(Shape{1, 6, 10, 10}, 41);
  ConvParams p{RandomTensor(Shape{4, 6, 3, 3}, 42), std::vector<float>(4, 0.0f)};
  const float a = 0.75f, b = -1.25f;
  Tensor mix(x.shape());
  for (int64_t i = 0; i < x.numel(); ++i) mix.data()[i] = a * x.data()[i] + b * y.data()[i];
  const Tensor lhs = panoflow::Conv2d(mix, p, 1, 1);
  const Tensor cx = panoflow::Conv2d(x, p, 1, 1);
  const Tensor cy = panoflow::Conv2d(y, p, 1, 1);
  for (int64_t i = 0; i < lhs.numel(); ++i) {
    const double rhs = a * cx.data()[i] + b * cy.data()[i];
    CHECK(std::abs(lhs.data()[i] - rhs) <= 1e-5 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("conv2d errors name both shapes") {
  const Tensor in(Shape{1, 3, 4, 4});
  ConvParams p{Tensor(Shape{2, 5, 3, 3}), {0.0f, 0.0f}};
  try {
    panoflow::Conv2d(in, p, 1, 1);
    FAIL("expected an error");
  } catch (const panoflow::Error& e) {
    CHECK(e.code() == ErrorCode::kShapeMismatch);
    const std::string msg = e.what();
    CHECK(msg.find("1x3x4x4") != std::string::npos);
    CHECK(msg.find("2x5x3x3") != std::string::npos);
  }
  ConvParams big{Tensor(Shape{1, 3, 5, 5}), {0.0f}};
  CHECK(CodeOf([&] { panoflow::Conv2d(in, big, 1, 2); }) == ErrorCode::kShapeMismatch);
  CHECK(CodeOf([&] { panoflow::Conv2d(in, p, 0, 1); }) != ErrorCode::kIo);
}

TEST_CASE("conv2d is deterministic across calls") {
  const Tensor in = RandomTensor(Shape{1, 24, 16, 16}, 7);
  ConvParams p{RandomTensor(Shape{8, 24, 3, 3}, 8), RandomVector(8, 9)};
  CHECK(BitEqual(panoflow::Conv2d(in, p, 1, 1).data(), panoflow::Conv2d(in, p, 1, 1).data()));
}

TEST_CASE("deconv2x single tap and impulse response") {
  ConvParams ones{Tensor(Shape{1, 1, 2, 2}, 1.0f), {0.0f}};
  const Tensor out = panoflow::Deconv2x(Tensor(Shape{1, 1, 1, 1}, 2.5f), ones);
  CHECK(out.shape() == Shape{1, 1, 2, 2});
  for (float v : out.data()) CHECK(v == 2.5f);

  Tensor impulse(Shape{1, 1, 3, 3});
  impulse.at(0, 0, 0, 0) = 1.0f;
  ConvParams k{Tensor(Shape{1, 1, 2, 2}, std::vector<float>{1, 2, 3, 4}), {0.0f}};
  const Tensor r = panoflow::Deconv2x(impulse, k);
  CHECK(r.at(0, 0, 0, 0) == 1.0f);
  CHECK(r.at(0, 0, 0, 1) == 2.0f);
  CHECK(r.at(0, 0, 1, 0) == 3.0f);
  CHECK(r.at(0, 0, 1, 1) == 4.0f);
  CHECK(r.at(0, 0, 2, 2) == 0.0f);
}

TEST_CASE("deconv2x matches the scatter reference bitwise") {
  const Shape shapes[] = {{1, 2, 3, 3}, {2, 5, 4, 7}, {1, 19, 6, 5}};
  uint64_t seed = 100;
  for (const Shape& s : shapes) {
    const Tensor in = RandomTensor(s, seed++);
    ConvParams p{RandomTensor(Shape{3, s.channels, 2, 2}, seed++), RandomVector(3, seed++)};
    const oracle::Dense want =
        oracle::Deconv2x(testutil::ToDense(in), testutil::ToDense(p.weights), p.bias);
    CHECK(BitEqual(panoflow::Deconv2x(in, p).data(), want.v));
  }
  ConvParams bad{Tensor(Shape{1, 2, 3, 3}), {0.0f}};
  CHECK(CodeOf([&] { panoflow::Deconv2x(Tensor(Shape{1, 2, 2, 2}), bad); }) ==
        ErrorCode::kShapeMismatch);
}

TEST_CASE("group norm statistics") {
  const std::vector<float> ones(32, 1.0f), zeros(32, 0.0f);
  const Tensor flat = panoflow::GroupNorm(Tensor(Shape{1, 32, 4, 4}, 3.0f), 32, ones, zeros);
  for (float v : flat.data()) CHECK(v == 0.0f);

  const std::vector<float> beta(32, 0.7f);
  const Tensor collapsed =
      panoflow::GroupNorm(RandomTensor(Shape{1, 32, 4, 4}, 5), 32, zeros, beta);
  for (float v : collapsed.data()) CHECK(v == 0.7f);

  for (int groups : {32, 8, 1}) {
    const Tensor x = RandomTensor(Shape{2, 32, 4, 4}, 11 + groups, -3.0f, 5.0f);
    const Tensor y = panoflow::GroupNorm(x, groups, ones, zeros);
    const int64_t per = 32 / groups;
    for (int64_t n = 0; n < 2; ++n) {
      for (int64_t g = 0; g < groups; ++g) {
        long double sum = 0, sq = 0;
        const int64_t count = per * 16;
        for (int64_t c = g * per; c < (g + 1) * per; ++c) {
          for (int64_t i = 0; i < 16; ++i) sum += y.plane(n, c)[i];
        }
        const long double mean = sum / count;
        for (int64_t c = g * per; c < (g + 1) * per; ++c) {
          for (int64_t i = 0; i < 16; ++i) sq += (y.plane(n, c)[i] - mean) * (y.plane(n, c)[i] - mean);
        }
        CHECK(std::abs(static_cast<double>(mean)) < 1e-5);
        CHECK(std::abs(static_cast<double>(sq / count) - 1.0) < 1e-3);
      }
    }
  }
  CHECK(CodeOf([&] { panoflow::GroupNorm(Tensor(Shape{1, 30, 2, 2}), 32, ones, zeros); }) ==
        ErrorCode::kShapeMismatch);
}

TEST_CASE("bilinear resize") {
  const Tensor c(Shape{1, 2, 5, 3}, 0.3f);
  for (auto [h, w] : {std::pair<int64_t, int64_t>{10, 6}, {7, 11}, {1, 1}, {20, 12}}) {
    const Tensor r = panoflow::BilinearResize(c, h, w);
    for (float v : r.data()) CHECK(v == 0.3f);
  }

  const Tensor up = panoflow::BilinearResize(c, 10, 6);
  Tensor down(c.shape());
  for (int64_t ch = 0; ch < 2; ++ch) {
    for (int64_t y = 0; y < 5; ++y) {
      for (int64_t x = 0; x < 3; ++x) {
        down.at(0, ch, y, x) = (up.at(0, ch, 2 * y, 2 * x) + up.at(0, ch, 2 * y, 2 * x + 1) +
                                up.at(0, ch, 2 * y + 1, 2 * x) + up.at(0, ch, 2 * y + 1, 2 * x + 1)) /
                               4.0f;
      }
    }
  }
  CHECK(BitEqual(down.data(), c.data()));

  const Tensor q(Shape{1, 1, 2, 2}, std::vector<float>{0, 1, 2, 3});
  const Tensor r = panoflow::BilinearResize(q, 4, 4);
  auto coord = [](int64_t d) { return std::clamp((d + 0.5) * 2.0 / 4.0 - 0.5, 0.0, 1.0); };
  for (int64_t y = 0; y < 4; ++y) {
    for (int64_t x = 0; x < 4; ++x) {
      const double sy = coord(y), sx = coord(x);
      const double want = (1 - sy) * (1 - sx) * 0 + (1 - sy) * sx * 1 + sy * (1 - sx) * 2 + sy * sx * 3;
      CHECK(std::abs(r.at(0, 0, y, x) - want) <= 1e-6);
    }
  }
  CHECK(r.at(0, 0, 0, 0) == 0.0f);
  CHECK(r.at(0, 0, 3, 3) == 3.0f);
  CHECK(r.at(0, 0, 1, 1) == doctest::Approx(0.75));
}

TEST_CASE("activations") {
  const Tensor r =
      panoflow::Activate(Tensor(Shape{1, 1, 1, 3}, std::vector<float>{-1, 0, 2}), Activation::kRelu);
  CHECK(r.at(0, 0, 0, 0) == 0.0f);
  CHECK(r.at(0, 0, 0, 1) == 0.0f);
  CHECK(r.at(0, 0, 0, 2) == 2.0f);

  const Tensor eq = panoflow::Activate(Tensor(Shape{1, 7, 2, 2}, 4.0f), Activation::kSoftmaxChannel);
  for (float v : eq.data()) CHECK(v == doctest::Approx(1.0 / 7).epsilon(1e-7));

  const Tensor s = panoflow::Activate(RandomTensor(Shape{2, 54, 8, 8}, 9, -30.0f, 30.0f),
                                      Activation::kSoftmaxChannel);
  for (int64_t n = 0; n < 2; ++n) {
    for (int64_t i = 0; i < 64; ++i) {
      double sum = 0;
      for (int64_t c = 0; c < 54; ++c) {
        const float v = s.plane(n, c)[i];
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-6);
    }
  }
  const Tensor big = panoflow::Activate(Tensor(Shape{1, 2, 1, 1}, std::vector<float>{1000, 1000}),
                                        Activation::kSoftmaxChannel);
  CHECK(big.at(0, 0, 0, 0) == 0.5f);

  const Tensor sg = panoflow::Sigmoid(Tensor(Shape{1, 1, 1, 2}, std::vector<float>{0, 100}));
  CHECK(sg.at(0, 0, 0, 0) == 0.5f);
  CHECK(sg.at(0, 0, 0, 1) == 1.0f);
}

TEST_CASE("add and nearest upsampling") {
  const Tensor a = RandomTensor(Shape{1, 3, 4, 4}, 1);
  const Tensor b = RandomTensor(Shape{1, 3, 4, 4}, 2);
  CHECK(BitEqual(panoflow::Add(a, Tensor(a.shape())).data(), a.data()));
  Tensor neg(a.shape());
  for (int64_t i = 0; i < a.numel(); ++i) neg.data()[i] = -a.data()[i];
  const Tensor zero = panoflow::Add(a, neg);
  for (float v : zero.data()) CHECK(v == 0.0f);
  CHECK(BitEqual(panoflow::Add(a, b).data(), panoflow::Add(b, a).data()));
  CHECK(CodeOf([&] { panoflow::Add(a, Tensor(Shape{1, 3, 4, 5})); }) == ErrorCode::kShapeMismatch);

  const Tensor up = panoflow::UpsampleNearest2x(a);
  CHECK(up.shape() == Shape{1, 3, 8, 8});
  CHECK(up.at(0, 2, 5, 7) == a.at(0, 2, 2, 3));
}

}  // TEST_SUITE
