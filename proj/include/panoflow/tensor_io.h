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

#ifndef PANOFLOW_TENSOR_IO_H_
#define PANOFLOW_TENSOR_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "panoflow/tensor.h"

namespace panoflow {

// FTNS container: "FTNS", u32 rank, rank x u32 dims, float32 payload, all
// little-endian. Ranks 1..4 are accepted on read and left-padded with ones;
// writes are always rank 4.
std::vector<uint8_t> EncodeTensor(const Tensor& tensor);
Tensor DecodeTensor(std::span<const uint8_t> bytes);

void WriteTensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor ReadTensor(const std::filesystem::path& path);

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::span<const uint8_t> bytes);

}  // namespace panoflow

#endif  // PANOFLOW_TENSOR_IO_H_
