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
#include <limits>

#include "doctest.h"
#include "panoflow/tensor_io.h"
#include "test_util.h"

using panoflow::ErrorCode;
using panoflow::Shape;
using panoflow::Tensor;
using testutil::CodeOf;

namespace {

std::vector<uint8_t> Header(std::initializer_list<uint32_t> words) {
  std::vector<uint8_t> out = {'F', 'T', 'N', 'S'};
  for (uint32_t w : words) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(w >> (8 * i)));
  }
  return out;
}

}  // namespace

TEST_SUITE("tensor_io") {

TEST_CASE("ftns layout is little-endian rank 4") {
  const Tensor t(Shape{1, 2, 1, 1}, std::vector<float>{1.0f, -2.0f});
  const std::vector<uint8_t> bytes = panoflow::EncodeTensor(t);
  std::vector<uint8_t> want = Header({4, 1, 2, 1, 1});
  for (uint32_t bits : {0x3F800000u, 0xC0000000u}) {
    for (int i = 0; i < 4; ++i) want.push_back(static_cast<uint8_t>(bits >> (8 * i)));
  }
  CHECK(bytes == want);
}

TEST_CASE("ftns round trip keeps every bit") {
  Tensor t = testutil::RandomTensor(Shape{2, 3, 5, 7}, 1, -1e6f, 1e6f);
  t.data()[0] = std::numeric_limits<float>::infinity();
  t.data()[1] = -0.0f;
  t.data()[2] = std::numeric_limits<float>::denorm_min();
  const Tensor back = panoflow::DecodeTensor(panoflow::EncodeTensor(t));
  CHECK(back.shape() == t.shape());
  CHECK(testutil::BitEqual(back.data(), t.data()));

  testutil::TempDir dir("ftns");
  panoflow::WriteTensor(dir / "t.ftns", t);
  CHECK(testutil::BitEqual(panoflow::ReadTensor(dir / "t.ftns").data(), t.data()));
}

TEST_CASE("lower ranks are left-padded") {
  std::vector<uint8_t> bytes = Header({2, 2, 3});
  for (int i = 0; i < 6; ++i) {
    const float f = static_cast<float>(i);
    const uint32_t bits = std::bit_cast<uint32_t>(f);
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<uint8_t>(bits >> (8 * b)));
  }
  const Tensor t = panoflow::DecodeTensor(bytes);
  CHECK(t.shape() == Shape{1, 1, 2, 3});
  CHECK(t.at(0, 0, 1, 2) == 5.0f);
}

TEST_CASE("malformed ftns is a format error") {
  CHECK(CodeOf([] { panoflow::DecodeTensor(std::vector<uint8_t>{'N', 'O', 'P', 'E', 0, 0, 0, 0}); }) ==
        ErrorCode::kFormat);
  CHECK(CodeOf([] { panoflow::DecodeTensor(Header({5, 1, 1, 1, 1, 1})); }) == ErrorCode::kFormat);
  CHECK(CodeOf([] { panoflow::DecodeTensor(Header({0})); }) == ErrorCode::kFormat);
  CHECK(CodeOf([] { panoflow::DecodeTensor(Header({4, 1, 1})); }) == ErrorCode::kFormat);
  CHECK(CodeOf([] { panoflow::DecodeTensor(Header({1, 0})); }) == ErrorCode::kFormat);
  CHECK(CodeOf([] { panoflow::DecodeTensor(Header({1, 2, 0, 0, 0, 0})); }) == ErrorCode::kFormat);
  CHECK(CodeOf([] {
          panoflow::DecodeTensor(Header({4, 0xFFFFFFFFu, 0xFFFFFFFFu, 0xFFFFFFFFu, 0xFFFFFFFFu}));
        }) == ErrorCode::kFormat);
  CHECK(CodeOf([] { panoflow::ReadTensor("/nonexistent/x.ftns"); }) == ErrorCode::kIo);
}

}  // TEST_SUITE
