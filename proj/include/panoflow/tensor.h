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

#ifndef PANOFLOW_TENSOR_H_
#define PANOFLOW_TENSOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace panoflow {

struct Shape {
  int64_t batch = 1;
  int64_t channels = 1;
  int64_t height = 1;
  int64_t width = 1;

  int64_t numel() const { return batch * channels * height * width; }
  int64_t plane() const { return height * width; }
  std::string ToString() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

// Dense rank-4 float tensor in (batch, channel, height, width) row-major
// order. Every dimension is at least one.
class Tensor {
 public:
  Tensor() : Tensor(Shape{}) {}
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  const Shape& shape() const { return shape_; }
  int64_t batch() const { return shape_.batch; }
  int64_t channels() const { return shape_.channels; }
  int64_t height() const { return shape_.height; }
  int64_t width() const { return shape_.width; }
  int64_t numel() const { return shape_.numel(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  float& at(int64_t n, int64_t c, int64_t y, int64_t x) {
    return data_[static_cast<size_t>(((n * shape_.channels + c) * shape_.height + y) *
                                         shape_.width + x)];
  }
  float at(int64_t n, int64_t c, int64_t y, int64_t x) const {
    return data_[static_cast<size_t>(((n * shape_.channels + c) * shape_.height + y) *
                                         shape_.width + x)];
  }

  // Pointer to the start of plane (n, c).
  float* plane(int64_t n, int64_t c) {
    return data_.data() + (n * shape_.channels + c) * shape_.plane();
  }
  const float* plane(int64_t n, int64_t c) const {
    return data_.data() + (n * shape_.channels + c) * shape_.plane();
  }

  // Copy of batch item `n` as a batch-1 tensor.
  Tensor Slice(int64_t n) const;

  double Mean() const;
  float Max() const;

 private:
  Shape shape_;
  std::vector<float> data_;
};

// Weights are (out_ch, in_ch, kh, kw); bias has out_ch entries.
struct ConvParams {
  Tensor weights;
  std::vector<float> bias;

  int64_t out_channels() const { return weights.batch(); }
  int64_t in_channels() const { return weights.channels(); }
  int64_t kernel_h() const { return weights.height(); }
  int64_t kernel_w() const { return weights.width(); }
};

enum class Activation { kRelu, kSoftmaxChannel };

// Direct convolution. Each output element is accumulated in double precision
// in (in_ch, kh, kw) order, bias added last, then rounded to float. Zero
// padding taps are exact no-ops, so results are bitwise reproducible.
Tensor Conv2d(const Tensor& input, const ConvParams& params, int stride, int padding);

// Transposed 2x2 convolution with stride 2. Kernel layout matches Conv2d:
// (out_ch, in_ch, 2, 2). Output pixel (2y+ky, 2x+kx) receives exactly one
// tap per input channel.
Tensor Deconv2x(const Tensor& input, const ConvParams& params);

Tensor GroupNorm(const Tensor& input, int groups, std::span<const float> gamma,
                 std::span<const float> beta, float epsilon = 1e-5f);

// Bilinear interpolation. With align_corners == false (the toolkit default)
// sample positions use half-pixel centers: src = (dst + 0.5) * in / out - 0.5,
// clamped at zero on the low side.
Tensor BilinearResize(const Tensor& input, int64_t out_h, int64_t out_w,
                      bool align_corners = false);

// Nearest-neighbour 2x upsampling.
Tensor UpsampleNearest2x(const Tensor& input);

Tensor Activate(const Tensor& input, Activation kind);
Tensor Sigmoid(const Tensor& input);
Tensor Add(const Tensor& a, const Tensor& b);
void AddInPlace(Tensor& a, const Tensor& b);

}  // namespace panoflow

#endif  // PANOFLOW_TENSOR_H_
