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

#ifndef VIG_TGD_H_
#define VIG_TGD_H_

#include <cstdint>
#include <string>
#include <vector>

#include "vig/tensor.h"

namespace vig {

// Ground-truth guided input composition for pretraining. A mask picks, per
// w x w block, whether the network sees the raw (1) or compressed (0) pixels.
struct MaskSpec {
  double ratio = 0.9;  // fraction of raw blocks
  int patch_size = 32;
  std::uint64_t seed = 0;

  void Validate() const;
  bool operator==(const MaskSpec&) const = default;
};

bool IsAllowedPatchSize(int w);

// Number of compressed blocks among `total_blocks`:
// max(1, round((1 - ratio) * total_blocks)) for ratio < 1, else 0.
int CompressedBlockCount(double ratio, int total_blocks);

class MaskGrid {
 public:
  MaskGrid(int height, int width, int patch_size, std::uint8_t fill = 1);

  int height() const { return height_; }
  int width() const { return width_; }
  int patch_size() const { return patch_; }
  int blocks_y() const { return height_ / patch_; }
  int blocks_x() const { return width_ / patch_; }
  int block_count() const { return blocks_y() * blocks_x(); }

  std::uint8_t at(int y, int x) const { return bits_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t block(int by, int bx) const { return at(by * patch_, bx * patch_); }
  void SetBlock(int by, int bx, std::uint8_t v);

  int CountCompressedBlocks() const;
  std::size_t CountCompressedPixels() const;
  bool operator==(const MaskGrid&) const = default;

 private:
  int height_, width_, patch_;
  std::vector<std::uint8_t> bits_;
};

// Chooses compressed blocks uniformly without replacement; deterministic in
// spec.seed. Blocks are aligned to the frame origin.
MaskGrid BuildMask(const MaskSpec& spec, int height, int width);

// mask ? gt : comp, element-wise over 1 x H x W frames.
template <typename T>
Tensor<T> Compose(const Tensor<T>& gt, const Tensor<T>& comp, const MaskGrid& mask);

// Mean of sqrt((pred - target)^2 + eps). Writes d loss / d pred when grad is set.
template <typename T>
T Charbonnier(const Tensor<T>& pred, const Tensor<T>& target, double eps, Tensor<T>* grad = nullptr);

// Charbonnier restricted to compressed (mask == 0) pixels and normalized by
// their count. The gradient is exactly zero on raw pixels.
template <typename T>
T MaskedCharbonnier(const Tensor<T>& pred, const Tensor<T>& target, const MaskGrid& mask, double eps,
                    Tensor<T>* grad = nullptr);

struct SchedulePeriod {
  int patch_size = 32;
  double ratio = 0.9;
  long iterations = 0;
  bool operator==(const SchedulePeriod&) const = default;
};

// Ordered pretraining periods; each period uses one mask configuration.
struct Schedule {
  std::vector<SchedulePeriod> periods;

  long total_iterations() const;
  // Index of the period containing `iteration`; periods are half-open.
  int PeriodIndex(long iteration) const;
  long PeriodStart(int index) const;
  void Validate(int crop) const;

  // Evenly splits `total` iterations across `sizes` (remainder to the last).
  static Schedule Progressive(const std::vector<int>& sizes, double ratio, long total);
  // 32, 16, 8, 4 at ratio 0.9, 5000 iterations each.
  static Schedule PaperDefault();

  std::string ToString() const;  // "32:0.9:5000,16:0.9:5000,..."
  static Schedule Parse(const std::string& text);

  bool operator==(const Schedule&) const = default;
};

// Mask configuration (without seed) of the period containing `iteration`.
MaskSpec ScheduleLookup(const Schedule& schedule, long iteration);

}  // namespace vig

#endif  // VIG_TGD_H_
