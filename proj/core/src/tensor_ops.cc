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

#include "vig/tensor_ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <memory>
#include <sstream>

namespace vig {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kRange: return "range";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kEmpty: return "empty";
  }
  return "unknown";
}

std::string ShapeString(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ')';
  return os.str();
}

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;

struct Trailing {
  std::size_t batch;
  int c, h, w;
};

Trailing SplitTrailing(const Shape& s, const char* op) {
  Require(s.size() >= 3, ErrorCode::kShape, std::string(op) + ": need rank >= 3, got " + ShapeString(s));
  Trailing t{1, s[s.size() - 3], s[s.size() - 2], s[s.size() - 1]};
  for (std::size_t i = 0; i + 3 < s.size(); ++i) t.batch *= static_cast<std::size_t>(s[i]);
  return t;
}

// Writes (Cin*k*k, H*W) columns for one (Cin, H, W) frame.
template <typename T>
void Im2Col(const T* src, int channels, int h, int w, int k, T* cols) {
  const int pad = k / 2;
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  for (int c = 0; c < channels; ++c) {
    const T* plane = src + c * hw;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* row = cols + ((static_cast<std::size_t>(c) * k + ky) * k + kx) * hw;
        const int dx = kx - pad;
        const int x0 = std::max(0, -dx);
        const int x1 = std::min(w, w - dx);
        for (int y = 0; y < h; ++y) {
          T* dst = row + static_cast<std::size_t>(y) * w;
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h || x0 >= x1) {
            std::fill(dst, dst + w, T(0));
            continue;
          }
          const T* srow = plane + static_cast<std::size_t>(sy) * w;
          std::fill(dst, dst + x0, T(0));
          std::copy(srow + x0 + dx, srow + x1 + dx, dst + x0);
          std::fill(dst + x1, dst + w, T(0));
        }
      }
    }
  }
}

template <typename T>
void Col2Im(const T* cols, int channels, int h, int w, int k, T* dst) {
  const int pad = k / 2;
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  std::fill(dst, dst + channels * hw, T(0));
  for (int c = 0; c < channels; ++c) {
    T* plane = dst + c * hw;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* row = cols + ((static_cast<std::size_t>(c) * k + ky) * k + kx) * hw;
        const int dx = kx - pad;
        const int x0 = std::max(0, -dx);
        const int x1 = std::min(w, w - dx);
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h) continue;
          const T* src = row + static_cast<std::size_t>(y) * w;
          T* drow = plane + static_cast<std::size_t>(sy) * w;
          for (int x = x0; x < x1; ++x) drow[x + dx] += src[x];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> PixelUnshuffle(const Tensor<T>& x, int f) {
  Require(f >= 1, ErrorCode::kRange, "PixelUnshuffle: factor must be >= 1");
  const Trailing t = SplitTrailing(x.shape(), "PixelUnshuffle");
  Require(t.h % f == 0 && t.w % f == 0, ErrorCode::kShape,
          "PixelUnshuffle: spatial dims of " + ShapeString(x.shape()) + " not divisible by " +
              std::to_string(f));
  const int oh = t.h / f, ow = t.w / f, oc = t.c * f * f;
  Shape out_shape = x.shape();
  out_shape[out_shape.size() - 3] = oc;
  out_shape[out_shape.size() - 2] = oh;
  out_shape[out_shape.size() - 1] = ow;
  Tensor<T> out(out_shape);
  const std::size_t in_frame = static_cast<std::size_t>(t.c) * t.h * t.w;
  for (std::size_t b = 0; b < t.batch; ++b) {
    const T* src = x.data() + b * in_frame;
    T* dst = out.data() + b * in_frame;
    for (int c = 0; c < t.c; ++c)
      for (int dy = 0; dy < f; ++dy)
        for (int dx = 0; dx < f; ++dx) {
          T* plane = dst + static_cast<std::size_t>((c * f + dy) * f + dx) * oh * ow;
          for (int y = 0; y < oh; ++y)
            for (int xx = 0; xx < ow; ++xx)
              plane[y * ow + xx] = src[(static_cast<std::size_t>(c) * t.h + y * f + dy) * t.w + xx * f + dx];
        }
  }
  return out;
}

template <typename T>
Tensor<T> PixelShuffle(const Tensor<T>& x, int f) {
  Require(f >= 1, ErrorCode::kRange, "PixelShuffle: factor must be >= 1");
  const Trailing t = SplitTrailing(x.shape(), "PixelShuffle");
  Require(t.c % (f * f) == 0, ErrorCode::kShape,
          "PixelShuffle: channels of " + ShapeString(x.shape()) + " not divisible by " +
              std::to_string(f * f));
  const int oc = t.c / (f * f), oh = t.h * f, ow = t.w * f;
  Shape out_shape = x.shape();
  out_shape[out_shape.size() - 3] = oc;
  out_shape[out_shape.size() - 2] = oh;
  out_shape[out_shape.size() - 1] = ow;
  Tensor<T> out(out_shape);
  const std::size_t frame = static_cast<std::size_t>(t.c) * t.h * t.w;
  for (std::size_t b = 0; b < t.batch; ++b) {
    const T* src = x.data() + b * frame;
    T* dst = out.data() + b * frame;
    for (int c = 0; c < oc; ++c)
      for (int dy = 0; dy < f; ++dy)
        for (int dx = 0; dx < f; ++dx) {
          const T* plane = src + static_cast<std::size_t>((c * f + dy) * f + dx) * t.h * t.w;
          for (int y = 0; y < t.h; ++y)
            for (int xx = 0; xx < t.w; ++xx)
              dst[(static_cast<std::size_t>(c) * oh + y * f + dy) * ow + xx * f + dx] = plane[y * t.w + xx];
        }
  }
  return out;
}

template <typename T>
void LeakyReluInPlace(Tensor<T>& x, T slope) {
  for (T& v : x.vec()) v = v > T(0) ? v : v * slope;
}

template <typename T>
void LeakyReluBackwardInPlace(const Tensor<T>& output, Tensor<T>& grad, T slope) {
  RequireSameShape(output.shape(), grad.shape(), "LeakyReluBackward");
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!(output[i] > T(0))) grad[i] *= slope;
}

template <typename T>
Tensor<T> TemporalMean(const Tensor<T>& x) {
  Require(x.rank() == 4 && x.dim(0) >= 1, ErrorCode::kShape,
          "TemporalMean: need non-empty rank-4 input, got " + ShapeString(x.shape()));
  const int frames = x.dim(0);
  Tensor<T> out(Shape(x.shape().begin() + 1, x.shape().end()));
  const std::size_t n = out.size();
  for (int t = 0; t < frames; ++t)
    for (std::size_t i = 0; i < n; ++i) out[i] += x[t * n + i];
  const T inv = T(1) / T(frames);
  for (T& v : out.vec()) v *= inv;
  return out;
}

template <typename T>
Tensor<T> TemporalMeanBackward(const Tensor<T>& grad, int frames) {
  Shape shape{frames};
  shape.insert(shape.end(), grad.shape().begin(), grad.shape().end());
  Tensor<T> out(shape);
  const std::size_t n = grad.size();
  const T inv = T(1) / T(frames);
  for (int t = 0; t < frames; ++t)
    for (std::size_t i = 0; i < n; ++i) out[t * n + i] = grad[i] * inv;
  return out;
}

template <typename T>
void AddInPlace(Tensor<T>& dst, const Tensor<T>& src) {
  RequireSameShape(dst.shape(), src.shape(), "Add");
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename T>
Tensor<T> ConvForward(const ConvGeometry& g, const Tensor<T>& x, const Tensor<T>& weight,
                      const Tensor<T>& bias, ConvCache<T>* cache) {
  RequireSameShape(weight.shape(), g.weight_shape(), "Conv weight");
  RequireSameShape(bias.shape(), g.bias_shape(), "Conv bias");
  Require(x.rank() == 3 || x.rank() == 4, ErrorCode::kShape,
          "Conv: need rank 3 or 4 input, got " + ShapeString(x.shape()));
  const bool rank3 = x.rank() == 3;
  const int frames = rank3 ? 1 : x.dim(0);
  const int c = x.dim(-3), h = x.dim(-2), w = x.dim(-1);
  Require(c == g.in_channels, ErrorCode::kShape,
          "Conv: expected " + std::to_string(g.in_channels) + " input channels, got " + ShapeString(x.shape()));
  Require(frames >= g.temporal_kernel, ErrorCode::kShape,
          "Conv: " + std::to_string(frames) + " frames is fewer than temporal kernel " +
              std::to_string(g.temporal_kernel));
  const int out_frames = frames - g.temporal_kernel + 1;
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  const std::size_t rows = static_cast<std::size_t>(c) * g.kernel * g.kernel;

  AlignedVector<T> local;
  AlignedVector<T>& cols = cache ? cache->columns : local;
  cols.resize(frames * rows * hw);
  for (int t = 0; t < frames; ++t)
    Im2Col(x.data() + t * c * hw, c, h, w, g.kernel, cols.data() + t * rows * hw);

  Tensor<T> out = (rank3 && out_frames == 1) ? Tensor<T>(Shape{g.out_channels, h, w})
                                             : Tensor<T>(Shape{out_frames, g.out_channels, h, w});
  ConstMatMap<T> wm(weight.data(), g.out_channels, g.temporal_kernel * rows);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bv(bias.data(), g.out_channels);
  for (int t = 0; t < out_frames; ++t) {
    ConstMatMap<T> cm(cols.data() + t * rows * hw, g.temporal_kernel * rows, hw);
    MatMap<T> om(out.data() + t * g.out_channels * hw, g.out_channels, hw);
    om.noalias() = wm * cm;
    om.colwise() += bv;
  }
  if (cache) {
    cache->geometry = g;
    cache->input_shape = x.shape();
  }
  return out;
}

template <typename T>
Tensor<T> ConvBackward(const ConvCache<T>& cache, const Tensor<T>& weight, const Tensor<T>& grad_out,
                       Tensor<T>& grad_weight, Tensor<T>& grad_bias) {
  const ConvGeometry& g = cache.geometry;
  const Shape& in_shape = cache.input_shape;
  const int frames = in_shape.size() == 3 ? 1 : in_shape[0];
  const int c = in_shape[in_shape.size() - 3], h = in_shape[in_shape.size() - 2],
            w = in_shape[in_shape.size() - 1];
  const int out_frames = frames - g.temporal_kernel + 1;
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  const std::size_t rows = static_cast<std::size_t>(c) * g.kernel * g.kernel;
  Require(grad_out.size() == static_cast<std::size_t>(out_frames) * g.out_channels * hw, ErrorCode::kShape,
          "ConvBackward: gradient " + ShapeString(grad_out.shape()) + " does not match cached forward");

  ConstMatMap<T> wm(weight.data(), g.out_channels, g.temporal_kernel * rows);
  MatMap<T> gw(grad_weight.data(), g.out_channels, g.temporal_kernel * rows);
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> gb(grad_bias.data(), g.out_channels);
  for (int t = 0; t < out_frames; ++t) {
    ConstMatMap<T> go(grad_out.data() + t * g.out_channels * hw, g.out_channels, hw);
    ConstMatMap<T> cm(cache.columns.data() + t * rows * hw, g.temporal_kernel * rows, hw);
    gw.noalias() += go * cm.transpose();
    // Plain loop: Eigen's vectorized row sums depend on buffer alignment.
    for (int o = 0; o < g.out_channels; ++o) {
      const T* row = grad_out.data() + (t * g.out_channels + o) * hw;
      T s = 0;
      for (std::size_t i = 0; i < hw; ++i) s += row[i];
      gb[o] += s;
    }
  }

  // Input frame s receives sum over dt of W_dt^T * G_{s-dt}.
  AlignedVector<T> grad_cols(rows * hw);
  MatMap<T> gc(grad_cols.data(), rows, hw);
  Tensor<T> grad_in(in_shape);
  for (int s = 0; s < frames; ++s) {
    bool first = true;
    for (int dt = 0; dt < g.temporal_kernel; ++dt) {
      const int t = s - dt;
      if (t < 0 || t >= out_frames) continue;
      ConstMatMap<T> go(grad_out.data() + t * g.out_channels * hw, g.out_channels, hw);
      auto w_dt = wm.middleCols(dt * rows, rows);
      if (first) gc.noalias() = w_dt.transpose() * go;
      else gc.noalias() += w_dt.transpose() * go;
      first = false;
    }
    if (first) continue;
    Col2Im(grad_cols.data(), c, h, w, g.kernel, grad_in.data() + s * c * hw);
  }
  return grad_in;
}

#define VIG_INSTANTIATE_OPS(T)                                                                     \
  template Tensor<T> PixelUnshuffle<T>(const Tensor<T>&, int);                                     \
  template Tensor<T> PixelShuffle<T>(const Tensor<T>&, int);                                       \
  template void LeakyReluInPlace<T>(Tensor<T>&, T);                                                \
  template void LeakyReluBackwardInPlace<T>(const Tensor<T>&, Tensor<T>&, T);                      \
  template Tensor<T> TemporalMean<T>(const Tensor<T>&);                                            \
  template Tensor<T> TemporalMeanBackward<T>(const Tensor<T>&, int);                               \
  template void AddInPlace<T>(Tensor<T>&, const Tensor<T>&);                                       \
  template Tensor<T> ConvForward<T>(const ConvGeometry&, const Tensor<T>&, const Tensor<T>&,       \
                                    const Tensor<T>&, ConvCache<T>*);                              \
  template Tensor<T> ConvBackward<T>(const ConvCache<T>&, const Tensor<T>&, const Tensor<T>&,      \
                                     Tensor<T>&, Tensor<T>&);

VIG_INSTANTIATE_OPS(float)
VIG_INSTANTIATE_OPS(double)

}  // namespace vig
