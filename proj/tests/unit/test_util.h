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

#ifndef PANOFLOW_TESTS_UNIT_TEST_UTIL_H_
#define PANOFLOW_TESTS_UNIT_TEST_UTIL_H_

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <random>
#include <vector>

#include "doctest.h"
#include "kernels_reference.h"
#include "panoflow/backbone.h"
#include "panoflow/error.h"
#include "panoflow/tensor.h"
#include "panoflow/tensor_io.h"

namespace testutil {

inline panoflow::Tensor RandomTensor(panoflow::Shape shape, uint64_t seed, float lo = -1.0f,
                                     float hi = 1.0f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(lo, hi);
  panoflow::Tensor t(shape);
  for (float& v : t.data()) v = dist(rng);
  return t;
}

inline std::vector<float> RandomVector(size_t n, uint64_t seed, float lo = -1.0f, float hi = 1.0f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(lo, hi);
  std::vector<float> v(n);
  for (float& x : v) x = dist(rng);
  return v;
}

inline oracle::Dense ToDense(const panoflow::Tensor& t) {
  return {t.batch(), t.channels(), t.height(), t.width(),
          std::vector<float>(t.data().begin(), t.data().end())};
}

inline bool BitEqual(std::span<const float> a, std::span<const float> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

template <typename F>
panoflow::ErrorCode CodeOf(F&& body) {
  try {
    body();
  } catch (const panoflow::Error& e) {
    return e.code();
  }
  FAIL("expected a panoflow::Error");
  return panoflow::ErrorCode::kInvalidArgument;
}

// Random pyramid with P3 of p3 x p3 and each further level halved (min 1).
inline panoflow::FeaturePyramid SyntheticPyramid(int64_t channels, int64_t p3, uint64_t seed) {
  panoflow::FeaturePyramid pyramid;
  for (int level = 3; level <= 7; ++level) {
    const int64_t s = std::max<int64_t>(1, p3 >> (level - 3));
    pyramid.levels[level] =
        RandomTensor(panoflow::Shape{1, channels, s, s}, seed * 10 + static_cast<uint64_t>(level));
  }
  return pyramid;
}

inline void WriteText(const std::filesystem::path& path, const std::string& text) {
  panoflow::WriteFileBytes(path,
                           std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

inline std::string ReadText(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = panoflow::ReadFileBytes(path);
  return std::string(bytes.begin(), bytes.end());
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("panoflow_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ignored;
    std::filesystem::remove_all(path_, ignored);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil

#endif  // PANOFLOW_TESTS_UNIT_TEST_UTIL_H_
