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

#ifndef VIG_TENSOR_H_
#define VIG_TENSOR_H_

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "vig/error.h"

namespace vig {

using Shape = std::vector<int>;

std::string ShapeString(const Shape& shape);

// 64-byte aligned storage. Vectorized reductions peel by address, so a fixed
// alignment keeps results bit-identical from run to run.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlignment); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

// Dense row-major tensor. Feature maps are rank 3 (C, H, W) or rank 4
// (T, C, H, W); frames are rank 3 with a single channel.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0)) : shape_(std::move(shape)) {
    std::size_t n = 1;
    for (int d : shape_) {
      Require(d >= 0, ErrorCode::kShape, "negative dimension in " + ShapeString(shape_));
      n *= static_cast<std::size_t>(d);
    }
    data_.assign(n, fill);
  }
  Tensor(std::initializer_list<int> shape, T fill = T(0)) : Tensor(Shape(shape), fill) {}

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[i < 0 ? shape_.size() + i : i]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> span() { return data_; }
  std::span<const T> span() const { return data_; }
  AlignedVector<T>& vec() { return data_; }
  const AlignedVector<T>& vec() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Rank-3 access.
  T& at(int c, int y, int x) { return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x]; }
  const T& at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }

  void Fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  // Reinterprets the element buffer under a new shape of equal size.
  Tensor Reshaped(Shape shape) const {
    Tensor out;
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    Require(n == data_.size(), ErrorCode::kShape,
            "cannot reshape " + ShapeString(shape_) + " to " + ShapeString(shape));
    out.shape_ = std::move(shape);
    out.data_ = data_;
    return out;
  }

  template <typename U>
  Tensor<U> Cast() const {
    Tensor<U> out(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  AlignedVector<T> data_;
};

inline void RequireSameShape(const Shape& a, const Shape& b, const std::string& what) {
  Require(a == b, ErrorCode::kShape,
          what + ": shape mismatch " + ShapeString(a) + " vs " + ShapeString(b));
}

// Stacks equally shaped rank-3 tensors along a new leading (time) axis.
template <typename T>
Tensor<T> Stack(std::span<const Tensor<T>* const> items) {
  Require(!items.empty(), ErrorCode::kEmpty, "Stack: no tensors");
  const Shape& inner = items.front()->shape();
  Shape shape{static_cast<int>(items.size())};
  shape.insert(shape.end(), inner.begin(), inner.end());
  Tensor<T> out(shape);
  const std::size_t n = items.front()->size();
  for (std::size_t t = 0; t < items.size(); ++t) {
    RequireSameShape(items[t]->shape(), inner, "Stack");
    std::copy(items[t]->data(), items[t]->data() + n, out.data() + t * n);
  }
  return out;
}

// Returns frame t of a rank-4 tensor as a rank-3 tensor.
template <typename T>
Tensor<T> Slice(const Tensor<T>& x, int t) {
  Tensor<T> out(Shape(x.shape().begin() + 1, x.shape().end()));
  const std::size_t n = out.size();
  std::copy(x.data() + t * n, x.data() + (t + 1) * n, out.data());
  return out;
}

}  // namespace vig

#endif  // VIG_TENSOR_H_
