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

#define PANOFLOW_KERNEL_NS generic
#include "conv_kernel.inc"

namespace panoflow::kernels {

void ScalarColumns(const ConvGeometry& g, const double* row_base, const double* weights,
                   int64_t ic_begin, int64_t ic_end, int stride, int64_t x_begin, int64_t x_end,
                   double* acc, int64_t acc_pitch) {
  for (int o = 0; o < kOcBlock; ++o) {
    for (int64_t x = x_begin; x < x_end; ++x) {
      double sum = acc[o * acc_pitch + x];
      const double* w = weights + ic_begin * g.kh * g.kw * kOcBlock;
      for (int64_t ic = ic_begin; ic < ic_end; ++ic) {
        const double* in_plane = row_base + ic * g.padded_hw + x * stride;
        for (int64_t ky = 0; ky < g.kh; ++ky) {
          const double* row = in_plane + ky * g.padded_w;
          for (int64_t kx = 0; kx < g.kw; ++kx, w += kOcBlock) sum += w[o] * row[kx];
        }
      }
      acc[o * acc_pitch + x] = sum;
    }
  }
}

}  // namespace panoflow::kernels
