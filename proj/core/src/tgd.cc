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

#include "vig/tgd.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

namespace vig {

bool IsAllowedPatchSize(int w) { return w == 2 || w == 4 || w == 8 || w == 16 || w == 32; }

void MaskSpec::Validate() const {
  Require(ratio >= 0.0 && ratio <= 1.0, ErrorCode::kConfig,
          "tgd.ratio must lie in [0, 1], got " + std::to_string(ratio));
  Require(IsAllowedPatchSize(patch_size), ErrorCode::kConfig,
          "tgd patch size must be one of 2, 4, 8, 16, 32, got " + std::to_string(patch_size));
}

int CompressedBlockCount(double ratio, int total_blocks) {
  if (ratio >= 1.0) return 0;
  const long n = std::lround((1.0 - ratio) * total_blocks);
  return static_cast<int>(std::clamp<long>(n, 1, total_blocks));
}

MaskGrid::MaskGrid(int height, int width, int patch_size, std::uint8_t fill)
    : height_(height), width_(width), patch_(patch_size) {
  Require(patch_size > 0 && height > 0 && width > 0, ErrorCode::kShape, "MaskGrid: non-positive dimension");
  Require(height % patch_size == 0 && width % patch_size == 0, ErrorCode::kShape,
          "MaskGrid: patch size " + std::to_string(patch_size) + " does not divide " + std::to_string(height) +
              "x" + std::to_string(width));
  bits_.assign(static_cast<std::size_t>(height) * width, fill);
}

void MaskGrid::SetBlock(int by, int bx, std::uint8_t v) {
  for (int y = by * patch_; y < (by + 1) * patch_; ++y)
    std::fill_n(bits_.begin() + static_cast<std::size_t>(y) * width_ + bx * patch_, patch_, v);
}

int MaskGrid::CountCompressedBlocks() const {
  int n = 0;
  for (int by = 0; by < blocks_y(); ++by)
    for (int bx = 0; bx < blocks_x(); ++bx) n += block(by, bx) == 0;
  return n;
}

std::size_t MaskGrid::CountCompressedPixels() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{0}));
}

MaskGrid BuildMask(const MaskSpec& spec, int height, int width) {
  spec.Validate();
  MaskGrid mask(height, width, spec.patch_size, 1);
  const int total = mask.block_count();
  const int compressed = CompressedBlockCount(spec.ratio, total);
  // Partial Fisher-Yates: the first `compressed` slots are a uniform sample.
  std::vector<int> order(total);
  for (int i = 0; i < total; ++i) order[i] = i;
  std::mt19937_64 rng(spec.seed);
  for (int i = 0; i < compressed; ++i) {
    std::uniform_int_distribution<int> pick(i, total - 1);
    std::swap(order[i], order[pick(rng)]);
    mask.SetBlock(order[i] / mask.blocks_x(), order[i] % mask.blocks_x(), 0);
  }
  return mask;
}

namespace {

template <typename T>
void RequireFrameMask(const Tensor<T>& frame, const MaskGrid& mask, const char* what) {
  Require(frame.rank() == 3 && frame.dim(0) == 1 && frame.dim(1) == mask.height() && frame.dim(2) == mask.width(),
          ErrorCode::kShape,
          std::string(what) + ": frame " + ShapeString(frame.shape()) + " does not match mask " +
              std::to_string(mask.height()) + "x" + std::to_string(mask.width()));
}

// Mean of per-pixel Charbonnier terms over the selected pixels. Deviations are
// accumulated relative to the first term so constant inputs give that term back
// exactly.
template <typename T, typename Select>
T CharbonnierImpl(const Tensor<T>& pred, const Tensor<T>& target, double eps, Tensor<T>* grad, Select selected) {
  RequireSameShape(pred.shape(), target.shape(), "Charbonnier");
  Require(eps > 0.0, ErrorCode::kRange, "Charbonnier: eps must be positive");
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) count += selected(i);
  Require(count > 0, ErrorCode::kEmpty, "Charbonnier: loss support is empty");
  if (grad) *grad = Tensor<T>(pred.shape());

  const double inv = 1.0 / static_cast<double>(count);
  bool have_ref = false;
  double ref = 0.0;
  long double dev = 0.0L;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!selected(i)) continue;
    const double d = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
    const double term = std::sqrt(d * d + eps);
    if (!have_ref) {
      ref = term;
      have_ref = true;
    } else {
      dev += static_cast<long double>(term) - ref;
    }
    if (grad) (*grad)[i] = static_cast<T>(d / term * inv);
  }
  return static_cast<T>(ref + static_cast<double>(dev / static_cast<long double>(count)));
}

}  // namespace

template <typename T>
Tensor<T> Compose(const Tensor<T>& gt, const Tensor<T>& comp, const MaskGrid& mask) {
  RequireSameShape(gt.shape(), comp.shape(), "Compose");
  RequireFrameMask(gt, mask, "Compose");
  Tensor<T> out(gt.shape());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) out.at(0, y, x) = mask.at(y, x) ? gt.at(0, y, x) : comp.at(0, y, x);
  return out;
}

template <typename T>
T Charbonnier(const Tensor<T>& pred, const Tensor<T>& target, double eps, Tensor<T>* grad) {
  return CharbonnierImpl(pred, target, eps, grad, [](std::size_t) { return true; });
}

template <typename T>
T MaskedCharbonnier(const Tensor<T>& pred, const Tensor<T>& target, const MaskGrid& mask, double eps,
                    Tensor<T>* grad) {
  RequireFrameMask(pred, mask, "MaskedCharbonnier");
  const std::size_t w = static_cast<std::size_t>(mask.width());
  return CharbonnierImpl(pred, target, eps, grad,
                         [&](std::size_t i) { return mask.at(static_cast<int>(i / w), static_cast<int>(i % w)) == 0; });
}

long Schedule::total_iterations() const {
  long n = 0;
  for (const auto& p : periods) n += p.iterations;
  return n;
}

int Schedule::PeriodIndex(long iteration) const {
  Require(iteration >= 0 && iteration < total_iterations(), ErrorCode::kRange,
          "schedule: iteration " + std::to_string(iteration) + " outside [0, " +
              std::to_string(total_iterations()) + ")");
  long start = 0;
  for (std::size_t i = 0; i < periods.size(); ++i) {
    if (iteration < start + periods[i].iterations) return static_cast<int>(i);
    start += periods[i].iterations;
  }
  Fail(ErrorCode::kRange, "schedule: iteration out of range");
}

long Schedule::PeriodStart(int index) const {
  long start = 0;
  for (int i = 0; i < index; ++i) start += periods[i].iterations;
  return start;
}

void Schedule::Validate(int crop) const {
  Require(!periods.empty(), ErrorCode::kConfig, "tgd.periods must not be empty");
  for (const auto& p : periods) {
    MaskSpec{p.ratio, p.patch_size, 0}.Validate();
    Require(p.iterations >= 0, ErrorCode::kConfig, "tgd.periods iteration counts must be >= 0");
    Require(crop % p.patch_size == 0, ErrorCode::kConfig,
            "tgd patch size " + std::to_string(p.patch_size) + " does not divide train.crop " +
                std::to_string(crop));
    Require(p.ratio < 1.0 || p.iterations == 0, ErrorCode::kConfig,
            "tgd.ratio 1 leaves no compressed pixels for the pretraining loss");
  }
}

Schedule Schedule::Progressive(const std::vector<int>& sizes, double ratio, long total) {
  Require(!sizes.empty(), ErrorCode::kConfig, "tgd.sizes must not be empty");
  Schedule s;
  const long n = static_cast<long>(sizes.size());
  for (long i = 0; i < n; ++i) {
    const long iters = total / n + (i == n - 1 ? total % n : 0);
    s.periods.push_back({sizes[i], ratio, iters});
  }
  return s;
}

Schedule Schedule::PaperDefault() { return Progressive({32, 16, 8, 4}, 0.9, 20000); }

std::string Schedule::ToString() const {
  std::string out;
  for (std::size_t i = 0; i < periods.size(); ++i) {
    char ratio[32];
    const auto res = std::to_chars(ratio, ratio + sizeof(ratio), periods[i].ratio);  // shortest round trip
    out += (i ? "," : "") + std::to_string(periods[i].patch_size) + ':' + std::string(ratio, res.ptr) + ':' +
           std::to_string(periods[i].iterations);
  }
  return out;
}

Schedule Schedule::Parse(const std::string& text) {
  Schedule s;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    SchedulePeriod p;
    char c1 = 0, c2 = 0;
    std::istringstream is(item);
    if (!(is >> p.patch_size >> c1 >> p.ratio >> c2 >> p.iterations) || c1 != ':' || c2 != ':' || !is.eof())
      Fail(ErrorCode::kParse, "tgd.periods: malformed period '" + item + "', expected w:ratio:iterations");
    s.periods.push_back(p);
  }
  Require(!s.periods.empty(), ErrorCode::kParse, "tgd.periods: empty list");
  return s;
}

MaskSpec ScheduleLookup(const Schedule& schedule, long iteration) {
  const SchedulePeriod& p = schedule.periods[schedule.PeriodIndex(iteration)];
  return MaskSpec{p.ratio, p.patch_size, 0};
}

#define VIG_INSTANTIATE_TGD(T)                                                                           \
  template Tensor<T> Compose<T>(const Tensor<T>&, const Tensor<T>&, const MaskGrid&);                    \
  template T Charbonnier<T>(const Tensor<T>&, const Tensor<T>&, double, Tensor<T>*);                     \
  template T MaskedCharbonnier<T>(const Tensor<T>&, const Tensor<T>&, const MaskGrid&, double, Tensor<T>*);

VIG_INSTANTIATE_TGD(float)
VIG_INSTANTIATE_TGD(double)

}  // namespace vig
