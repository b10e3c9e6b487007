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

#include "panoflow/tensor_io.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "panoflow/error.h"

namespace panoflow {

namespace {

constexpr std::array<uint8_t, 4> kMagic = {'F', 'T', 'N', 'S'};

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t GetU32(std::span<const uint8_t> bytes, size_t offset) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes[offset + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<uint8_t> EncodeTensor(const Tensor& tensor) {
  std::vector<uint8_t> out(kMagic.begin(), kMagic.end());
  out.reserve(4 + 4 + 16 + 4 * static_cast<size_t>(tensor.numel()));
  PutU32(out, 4);
  const Shape& s = tensor.shape();
  for (int64_t d : {s.batch, s.channels, s.height, s.width}) {
    Require(d <= UINT32_MAX, ErrorCode::kInvalidArgument, "tensor dim exceeds u32");
    PutU32(out, static_cast<uint32_t>(d));
  }
  for (float f : tensor.data()) PutU32(out, std::bit_cast<uint32_t>(f));
  return out;
}

Tensor DecodeTensor(std::span<const uint8_t> bytes) {
  Require(bytes.size() >= 8 && std::equal(kMagic.begin(), kMagic.end(), bytes.begin()),
          ErrorCode::kFormat, "not an FTNS tensor (bad magic)");
  const uint32_t rank = GetU32(bytes, 4);
  Require(rank >= 1 && rank <= 4, ErrorCode::kFormat,
          "FTNS rank " + std::to_string(rank) + " unsupported (1..4)");
  Require(bytes.size() >= 8 + 4 * static_cast<size_t>(rank), ErrorCode::kFormat,
          "FTNS header truncated");
  int64_t dims[4] = {1, 1, 1, 1};
  for (uint32_t i = 0; i < rank; ++i) dims[4 - rank + i] = GetU32(bytes, 8 + 4 * i);
  const Shape shape{dims[0], dims[1], dims[2], dims[3]};
  Require(shape.batch >= 1 && shape.channels >= 1 && shape.height >= 1 && shape.width >= 1,
          ErrorCode::kFormat, "FTNS dims must be >= 1");
  const size_t header = 8 + 4 * static_cast<size_t>(rank);
  const size_t capacity = (bytes.size() - header) / 4;
  size_t count = 1;
  for (int64_t d : dims) {
    const size_t n = static_cast<size_t>(d);
    Require(n <= capacity / count + 1 && count * n <= capacity, ErrorCode::kFormat,
            "FTNS payload too short for dims " + shape.ToString());
    count *= n;
  }
  Require(bytes.size() == header + 4 * count, ErrorCode::kFormat,
          "FTNS payload size " + std::to_string(bytes.size() - header) + " does not match dims " +
              shape.ToString());
  std::vector<float> data(count);
  for (size_t i = 0; i < count; ++i) data[i] = std::bit_cast<float>(GetU32(bytes, header + 4 * i));
  return Tensor(shape, std::move(data));
}

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void WriteFileBytes(const std::filesystem::path& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  Require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  Require(static_cast<bool>(out), ErrorCode::kIo, "short write to " + path.string());
}

void WriteTensor(const std::filesystem::path& path, const Tensor& tensor) {
  WriteFileBytes(path, EncodeTensor(tensor));
}

Tensor ReadTensor(const std::filesystem::path& path) {
  try {
    return DecodeTensor(ReadFileBytes(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace panoflow
