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

#ifndef PANOFLOW_SRC_CONV_KERNEL_H_
#define PANOFLOW_SRC_CONV_KERNEL_H_

#include <cstdint>

// Inner loops of the direct convolution. The row kernel is compiled twice,
// once for the baseline ISA and once with AVX2/FMA; both produce identical
// bits because every product of two floats is exact in double precision.

namespace panoflow::kernels {

constexpr int kOcBlock = 4;
constexpr int kXBlock = 8;

struct ConvGeometry {
  int64_t in_ch;
  int64_t kh, kw;
  int64_t padded_w;   // row pitch of the padded input
  int64_t padded_hw;  // plane pitch of the padded input
};

// Accumulates input channels [ic_begin, ic_end) into `full_tiles` tiles of
// kOcBlock x kXBlock outputs along one output row. `weights` is packed as
// [ic][ky][kx][o]; `acc` holds kOcBlock rows with pitch `acc_pitch`.
using RowFn = void (*)(const ConvGeometry& g, const double* row_base, const double* weights,
                       int64_t ic_begin, int64_t ic_end, int64_t full_tiles, double* acc,
                       int64_t acc_pitch);

// Indexed by stride - 1 (strides 1 and 2).
namespace generic {
extern const RowFn kRowKernels[2];
}
namespace avx2 {
extern const RowFn kRowKernels[2];
}

// Scalar path for column remainders and larger strides; same summation order.
void ScalarColumns(const ConvGeometry& g, const double* row_base, const double* weights,
                   int64_t ic_begin, int64_t ic_end, int stride, int64_t x_begin, int64_t x_end,
                   double* acc, int64_t acc_pitch);

}  // namespace panoflow::kernels

#endif  // PANOFLOW_SRC_CONV_KERNEL_H_
