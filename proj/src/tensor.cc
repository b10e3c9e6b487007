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

#include "panoflow/tensor.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <utility>

#include "conv_kernel.h"
#include "panoflow/error.h"

namespace panoflow {

namespace {

void CheckShape(const Shape& shape) {
  Require(shape.batch >= 1 && shape.channels >= 1 && shape.height >= 1 && shape.width >= 1,
          ErrorCode::kShapeMismatch, "tensor dims must all be >= 1, got " + shape.ToString());
}

using kernels::ConvGeometry;
using kernels::kOcBlock;
using kernels::kXBlock;

// Input channels per cache block. Chunks are visited in ascending order, so
// blocking does not change the per-element summation order.
constexpr int64_t kIcChunk = 16;

const kernels::RowFn* SelectRowKernels() {
#if defined(PANOFLOW_HAVE_AVX2_KERNEL)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return kernels::avx2::kRowKernels;
  }
#endif
  return kernels::generic::kRowKernels;
}

}  // namespace

std::string Shape::ToString() const {
  std::ostringstream os;
  os << batch << "x" << channels << "x" << height << "x" << width;
  return os.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(shape) {
  CheckShape(shape_);
  data_.assign(static_cast<size_t>(shape_.numel()), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
  CheckShape(shape_);
  Require(static_cast<int64_t>(data_.size()) == shape_.numel(), ErrorCode::kShapeMismatch,
          "tensor data length " + std::to_string(data_.size()) + " does not match dims " +
              shape_.ToString());
}

Tensor Tensor::Slice(int64_t n) const {
  Require(n >= 0 && n < shape_.batch, ErrorCode::kInvalidArgument, "batch index out of range");
  Shape s = shape_;
  s.batch = 1;
  const int64_t per = s.numel();
  std::vector<float> out(data_.begin() + n * per, data_.begin() + (n + 1) * per);
  return Tensor(s, std::move(out));
}

double Tensor::Mean() const {
  double sum = 0.0;
  for (float v : data_) sum += v;
  return sum / static_cast<double>(data_.size());
}

float Tensor::Max() const { return *std::max_element(data_.begin(), data_.end()); }

Tensor Conv2d(const Tensor& input, const ConvParams& params, int stride, int padding) {
  const Shape& in = input.shape();
  const Shape& ws = params.weights.shape();
  if (in.channels != ws.channels) {
    Fail(ErrorCode::kShapeMismatch, "conv2d: input " + in.ToString() +
                                        " does not match weights " + ws.ToString());
  }
  Require(ws.height >= 1 && ws.height <= 3 && ws.width >= 1 && ws.width <= 3,
          ErrorCode::kShapeMismatch, "conv2d: kernel must be 1..3 wide, weights " + ws.ToString());
  Require(static_cast<int64_t>(params.bias.size()) == ws.batch, ErrorCode::kShapeMismatch,
          "conv2d: bias length does not match " + ws.ToString());
  Require(stride >= 1 && padding >= 0, ErrorCode::kInvalidArgument,
          "conv2d: stride must be >= 1 and padding >= 0");

  const int64_t out_h = (in.height + 2 * padding - ws.height) / stride + 1;
  const int64_t out_w = (in.width + 2 * padding - ws.width) / stride + 1;
  Require(in.height + 2 * padding >= ws.height && in.width + 2 * padding >= ws.width,
          ErrorCode::kShapeMismatch,
          "conv2d: input " + in.ToString() + " smaller than kernel " + ws.ToString());

  const int64_t out_ch = ws.batch;
  const int64_t kk = ws.height * ws.width;
  // Padded rows carry slack so a full x-tile never reads past a row end.
  const int64_t padded_h = in.height + 2 * padding;
  const int64_t padded_w =
      std::max<int64_t>(in.width + 2 * padding, (out_w + kXBlock) * stride + ws.width);
  const ConvGeometry g{in.channels, ws.height, ws.width, padded_w, padded_h * padded_w};

  // Packed weights: per block of kOcBlock output channels, [ic][ky][kx][o].
  const int64_t blocks = (out_ch + kOcBlock - 1) / kOcBlock;
  std::vector<double> packed(static_cast<size_t>(blocks * in.channels * kk * kOcBlock), 0.0);
  const float* wsrc = params.weights.data().data();
  for (int64_t oc = 0; oc < out_ch; ++oc) {
    const int64_t b = oc / kOcBlock;
    const int o = static_cast<int>(oc % kOcBlock);
    for (int64_t ic = 0; ic < in.channels; ++ic) {
      for (int64_t t = 0; t < kk; ++t) {
        packed[static_cast<size_t>(((b * in.channels + ic) * kk + t) * kOcBlock + o)] =
            wsrc[(oc * in.channels + ic) * kk + t];
      }
    }
  }

  static const kernels::RowFn* const row_kernels = SelectRowKernels();
  Tensor output(Shape{in.batch, out_ch, out_h, out_w});
  std::vector<double> padded(static_cast<size_t>(in.channels * g.padded_hw + padded_w));
  const int64_t full_tiles = (stride <= 2) ? out_w / kXBlock : 0;
  const int64_t acc_pitch = out_w;
  std::vector<double> acc(static_cast<size_t>(kOcBlock * acc_pitch));
  for (int64_t n = 0; n < in.batch; ++n) {
    std::fill(padded.begin(), padded.end(), 0.0);
    for (int64_t c = 0; c < in.channels; ++c) {
      const float* src = input.plane(n, c);
      double* dst = padded.data() + c * g.padded_hw;
      for (int64_t y = 0; y < in.height; ++y) {
        for (int64_t x = 0; x < in.width; ++x) {
          dst[(y + padding) * padded_w + x + padding] = src[y * in.width + x];
        }
      }
    }
    for (int64_t b = 0; b < blocks; ++b) {
      const double* wblock = packed.data() + b * in.channels * kk * kOcBlock;
      const int64_t oc0 = b * kOcBlock;
      const int valid_oc = static_cast<int>(std::min<int64_t>(kOcBlock, out_ch - oc0));
      for (int64_t oy = 0; oy < out_h; ++oy) {
        const double* row_base = padded.data() + oy * stride * padded_w;
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int64_t ic0 = 0; ic0 < in.channels; ic0 += kIcChunk) {
          const int64_t ic1 = std::min(in.channels, ic0 + kIcChunk);
          if (stride <= 2) {
            row_kernels[stride - 1](g, row_base, wblock, ic0, ic1, full_tiles, acc.data(),
                                    acc_pitch);
          }
          kernels::ScalarColumns(g, row_base, wblock, ic0, ic1, stride, full_tiles * kXBlock, out_w,
                        acc.data(), acc_pitch);
        }
        for (int o = 0; o < valid_oc; ++o) {
          float* dst = output.plane(n, oc0 + o) + oy * out_w;
          const double bias = params.bias[static_cast<size_t>(oc0 + o)];
          const double* src = acc.data() + o * acc_pitch;
          for (int64_t x = 0; x < out_w; ++x) dst[x] = static_cast<float>(src[x] + bias);
        }
      }
    }
  }
  return output;
}

Tensor Deconv2x(const Tensor& input, const ConvParams& params) {
  const Shape& in = input.shape();
  const Shape& ws = params.weights.shape();
  Require(ws.height == 2 && ws.width == 2, ErrorCode::kShapeMismatch,
          "deconv2x: kernel must be 2x2, weights " + ws.ToString());
  if (in.channels != ws.channels) {
    Fail(ErrorCode::kShapeMismatch, "deconv2x: input " + in.ToString() +
                                        " does not match weights " + ws.ToString());
  }
  Require(static_cast<int64_t>(params.bias.size()) == ws.batch, ErrorCode::kShapeMismatch,
          "deconv2x: bias length does not match " + ws.ToString());

  const int64_t out_ch = ws.batch;
  const int64_t hw = in.plane();
  Tensor output(Shape{in.batch, out_ch, in.height * 2, in.width * 2});
  std::vector<double> acc(static_cast<size_t>(hw));
  const float* w = params.weights.data().data();
  for (int64_t n = 0; n < in.batch; ++n) {
    for (int64_t oc = 0; oc < out_ch; ++oc) {
      float* dst = output.plane(n, oc);
      for (int64_t tap = 0; tap < 4; ++tap) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int64_t ic = 0; ic < in.channels; ++ic) {
          const double k = w[(oc * in.channels + ic) * 4 + tap];
          const float* src = input.plane(n, ic);
          for (int64_t i = 0; i < hw; ++i) acc[static_cast<size_t>(i)] += k * src[i];
        }
        const int64_t ky = tap / 2;
        const int64_t kx = tap % 2;
        const double bias = params.bias[static_cast<size_t>(oc)];
        for (int64_t y = 0; y < in.height; ++y) {
          for (int64_t x = 0; x < in.width; ++x) {
            dst[(2 * y + ky) * (2 * in.width) + 2 * x + kx] =
                static_cast<float>(acc[static_cast<size_t>(y * in.width + x)] + bias);
          }
        }
      }
    }
  }
  return output;
}

Tensor GroupNorm(const Tensor& input, int groups, std::span<const float> gamma,
                 std::span<const float> beta, float epsilon) {
  const Shape& s = input.shape();
  Require(groups >= 1 && s.channels % groups == 0, ErrorCode::kShapeMismatch,
          "group_norm: " + std::to_string(s.channels) + " channels not divisible by " +
              std::to_string(groups) + " groups");
  Require(static_cast<int64_t>(gamma.size()) == s.channels &&
              static_cast<int64_t>(beta.size()) == s.channels,
          ErrorCode::kShapeMismatch, "group_norm: gamma/beta length must equal channel count");

  Tensor output(s);
  const int64_t per_group = s.channels / groups;
  const double count = static_cast<double>(per_group * s.plane());
  for (int64_t n = 0; n < s.batch; ++n) {
    for (int64_t g = 0; g < groups; ++g) {
      double sum = 0.0;
      for (int64_t c = g * per_group; c < (g + 1) * per_group; ++c) {
        const float* src = input.plane(n, c);
        for (int64_t i = 0; i < s.plane(); ++i) sum += src[i];
      }
      const double mean = sum / count;
      double sq = 0.0;
      for (int64_t c = g * per_group; c < (g + 1) * per_group; ++c) {
        const float* src = input.plane(n, c);
        for (int64_t i = 0; i < s.plane(); ++i) {
          const double d = src[i] - mean;
          sq += d * d;
        }
      }
      const double inv_std = 1.0 / std::sqrt(sq / count + epsilon);
      for (int64_t c = g * per_group; c < (g + 1) * per_group; ++c) {
        const float* src = input.plane(n, c);
        float* dst = output.plane(n, c);
        const double ga = gamma[static_cast<size_t>(c)];
        const double be = beta[static_cast<size_t>(c)];
        for (int64_t i = 0; i < s.plane(); ++i) {
          dst[i] = static_cast<float>(ga * (src[i] - mean) * inv_std + be);
        }
      }
    }
  }
  return output;
}

namespace {

struct Lerp {
  int64_t lo;
  int64_t hi;
  double frac;
};

std::vector<Lerp> LerpTable(int64_t in_size, int64_t out_size, bool align_corners) {
  std::vector<Lerp> table(static_cast<size_t>(out_size));
  for (int64_t i = 0; i < out_size; ++i) {
    double src;
    if (align_corners) {
      src = out_size > 1 ? static_cast<double>(i) * (in_size - 1) / (out_size - 1) : 0.0;
    } else {
      src = (i + 0.5) * static_cast<double>(in_size) / static_cast<double>(out_size) - 0.5;
      src = std::max(src, 0.0);
    }
    int64_t lo = std::min<int64_t>(static_cast<int64_t>(std::floor(src)), in_size - 1);
    int64_t hi = std::min<int64_t>(lo + 1, in_size - 1);
    table[static_cast<size_t>(i)] = {lo, hi, src - static_cast<double>(lo)};
  }
  return table;
}

}  // namespace

Tensor BilinearResize(const Tensor& input, int64_t out_h, int64_t out_w, bool align_corners) {
  Require(out_h >= 1 && out_w >= 1, ErrorCode::kInvalidArgument,
          "bilinear_resize: output size must be >= 1");
  const Shape& s = input.shape();
  const auto ys = LerpTable(s.height, out_h, align_corners);
  const auto xs = LerpTable(s.width, out_w, align_corners);
  Tensor output(Shape{s.batch, s.channels, out_h, out_w});
  for (int64_t n = 0; n < s.batch; ++n) {
    for (int64_t c = 0; c < s.channels; ++c) {
      const float* src = input.plane(n, c);
      float* dst = output.plane(n, c);
      for (int64_t y = 0; y < out_h; ++y) {
        const Lerp& ly = ys[static_cast<size_t>(y)];
        const float* r0 = src + ly.lo * s.width;
        const float* r1 = src + ly.hi * s.width;
        for (int64_t x = 0; x < out_w; ++x) {
          const Lerp& lx = xs[static_cast<size_t>(x)];
          const double top = r0[lx.lo] + (r0[lx.hi] - static_cast<double>(r0[lx.lo])) * lx.frac;
          const double bot = r1[lx.lo] + (r1[lx.hi] - static_cast<double>(r1[lx.lo])) * lx.frac;
          dst[y * out_w + x] = static_cast<float>(top + (bot - top) * ly.frac);
        }
      }
    }
  }
  return output;
}

Tensor UpsampleNearest2x(const Tensor& input) {
  const Shape& s = input.shape();
  Tensor output(Shape{s.batch, s.channels, s.height * 2, s.width * 2});
  for (int64_t n = 0; n < s.batch; ++n) {
    for (int64_t c = 0; c < s.channels; ++c) {
      const float* src = input.plane(n, c);
      float* dst = output.plane(n, c);
      for (int64_t y = 0; y < s.height * 2; ++y) {
        for (int64_t x = 0; x < s.width * 2; ++x) {
          dst[y * s.width * 2 + x] = src[(y / 2) * s.width + x / 2];
        }
      }
    }
  }
  return output;
}

Tensor Activate(const Tensor& input, Activation kind) {
  const Shape& s = input.shape();
  if (kind == Activation::kRelu) {
    Tensor output(s);
    auto src = input.data();
    auto dst = output.data();
    for (size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0f ? src[i] : 0.0f;
    return output;
  }
  Tensor output(s);
  const int64_t hw = s.plane();
  std::vector<double> exps(static_cast<size_t>(s.channels));
  for (int64_t n = 0; n < s.batch; ++n) {
    const float* src = input.plane(n, 0);
    float* dst = output.plane(n, 0);
    for (int64_t i = 0; i < hw; ++i) {
      double peak = -std::numeric_limits<double>::infinity();
      for (int64_t c = 0; c < s.channels; ++c) peak = std::max<double>(peak, src[c * hw + i]);
      double total = 0.0;
      for (int64_t c = 0; c < s.channels; ++c) {
        exps[static_cast<size_t>(c)] = std::exp(src[c * hw + i] - peak);
        total += exps[static_cast<size_t>(c)];
      }
      for (int64_t c = 0; c < s.channels; ++c) {
        dst[c * hw + i] = static_cast<float>(exps[static_cast<size_t>(c)] / total);
      }
    }
  }
  return output;
}

Tensor Sigmoid(const Tensor& input) {
  Tensor output(input.shape());
  auto src = input.data();
  auto dst = output.data();
  for (size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(src[i]))));
  }
  return output;
}

Tensor Add(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  AddInPlace(out, b);
  return out;
}

void AddInPlace(Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape())) {
    Fail(ErrorCode::kShapeMismatch,
         "add: dims " + a.shape().ToString() + " vs " + b.shape().ToString());
  }
  auto dst = a.data();
  auto src = b.data();
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace panoflow
