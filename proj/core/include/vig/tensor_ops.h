// Copyright 2026 The VIG Authors. All Rights Reserved.
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

#ifndef VIG_TENSOR_OPS_H_
#define VIG_TENSOR_OPS_H_

#include <vector>

#include "vig/tensor.h"

namespace vig {

// Space-to-depth over the trailing (C, H, W) axes; leading axes are batch.
// Output channel c*f*f + dy*f + dx at (y, x) reads input (c, y*f+dy, x*f+dx).
template <typename T>
Tensor<T> PixelUnshuffle(const Tensor<T>& x, int factor);

// Depth-to-space; exact inverse of PixelUnshuffle.
template <typename T>
Tensor<T> PixelShuffle(const Tensor<T>& x, int factor);

template <typename T>
void LeakyReluInPlace(Tensor<T>& x, T slope);

// Gradient through a leaky rectifier given its output (sign of output equals
// sign of the pre-activation for a positive slope).
template <typename T>
void LeakyReluBackwardInPlace(const Tensor<T>& output, Tensor<T>& grad, T slope);

// Mean over the leading (time) axis of a rank-4 tensor.
template <typename T>
Tensor<T> TemporalMean(const Tensor<T>& x);

// Broadcasts a rank-3 gradient back over `frames` time steps, scaled by 1/frames.
template <typename T>
Tensor<T> TemporalMeanBackward(const Tensor<T>& grad, int frames);

template <typename T>
void AddInPlace(Tensor<T>& dst, const Tensor<T>& src);

// Spatio-temporal convolution over a (T, Cin, H, W) input.
//
// Weight layout is (Cout, kt, Cin, k, k). The temporal axis is unpadded, so
// the output has T - kt + 1 frames; the spatial axes use zero padding k/2 and
// keep H, W. kt = 1 gives a per-frame 2-D convolution.
struct ConvGeometry {
  int in_channels = 0;
  int out_channels = 0;
  int temporal_kernel = 1;
  int kernel = 3;

  Shape weight_shape() const { return {out_channels, temporal_kernel, in_channels, kernel, kernel}; }
  Shape bias_shape() const { return {out_channels}; }
  int fan_in() const { return temporal_kernel * in_channels * kernel * kernel; }
};

template <typename T>
struct ConvCache {
  ConvGeometry geometry;
  Shape input_shape;
  AlignedVector<T> columns;  // (T, Cin*k*k, H*W), frame-major
};

template <typename T>
Tensor<T> ConvForward(const ConvGeometry& g, const Tensor<T>& x, const Tensor<T>& weight,
                      const Tensor<T>& bias, ConvCache<T>* cache = nullptr);

// Accumulates into grad_weight / grad_bias and returns the input gradient.
template <typename T>
Tensor<T> ConvBackward(const ConvCache<T>& cache, const Tensor<T>& weight, const Tensor<T>& grad_out,
                       Tensor<T>& grad_weight, Tensor<T>& grad_bias);

}  // namespace vig

#endif  // VIG_TENSOR_OPS_H_
