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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "test_util.h"

namespace vig {
namespace {

using testing::RandomTensor;

TEST(MaskTest, CompressedBlockCountRule) {
  EXPECT_EQ(CompressedBlockCount(0.9, 16), 2);   // round(1.6)
  EXPECT_EQ(CompressedBlockCount(0.9, 4), 1);    // round(0.4) = 0, raised to 1
  EXPECT_EQ(CompressedBlockCount(0.5, 16), 8);
  EXPECT_EQ(CompressedBlockCount(0.0, 16), 16);
  EXPECT_EQ(CompressedBlockCount(1.0, 16), 0);
  EXPECT_EQ(CompressedBlockCount(0.9, 1024), 102);  // round(102.4)
}

TEST(MaskTest, OneBlockAtThirtyTwoOnA64Crop) {
  const MaskGrid m = BuildMask({0.9, 32, 1}, 64, 64);
  EXPECT_EQ(m.block_count(), 4);
  EXPECT_EQ(m.CountCompressedBlocks(), 1);
  EXPECT_EQ(m.CountCompressedPixels(), 32u * 32u);
}

TEST(MaskTest, DeterministicInSeed) {
  EXPECT_EQ(BuildMask({0.7, 4, 42}, 32, 48), BuildMask({0.7, 4, 42}, 32, 48));
  EXPECT_NE(BuildMask({0.7, 4, 42}, 32, 48), BuildMask({0.7, 4, 43}, 32, 48));
}

TEST(MaskTest, RejectsInvalidSpecs) {
  EXPECT_THROW(BuildMask({0.9, 3, 0}, 12, 12), Error);
  EXPECT_THROW(BuildMask({1.5, 4, 0}, 16, 16), Error);
  EXPECT_THROW(BuildMask({-0.1, 4, 0}, 16, 16), Error);
  EXPECT_THROW(BuildMask({0.9, 32, 0}, 48, 64), Error);
}

TEST(MaskTest, PlacementIsRoughlyUniform) {
  // Each of 16 blocks should be picked about 2/16 of the time.
  std::vector<int> hits(16, 0);
  const int trials = 4000;
  for (int s = 0; s < trials; ++s) {
    const MaskGrid m = BuildMask({0.9, 8, static_cast<std::uint64_t>(s)}, 32, 32);
    for (int by = 0; by < 4; ++by)
      for (int bx = 0; bx < 4; ++bx) hits[by * 4 + bx] += m.block(by, bx) == 0;
  }
  for (int h : hits) EXPECT_NEAR(h / static_cast<double>(trials), 2.0 / 16, 0.03);
}

TEST(ComposeTest, PartitionsPixelsExactly) {
  std::mt19937_64 rng(3);
  const auto gt = RandomTensor<float>({1, 16, 16}, rng, 0, 1);
  const auto comp = RandomTensor<float>({1, 16, 16}, rng, 0, 1);
  const MaskGrid m = BuildMask({0.5, 4, 9}, 16, 16);
  const auto x = Compose(gt, comp, m);
  for (int y = 0; y < 16; ++y)
    for (int xx = 0; xx < 16; ++xx) EXPECT_EQ(x.at(0, y, xx), m.at(y, xx) ? gt.at(0, y, xx) : comp.at(0, y, xx));
  EXPECT_THROW(Compose(gt, Tensor<float>({1, 8, 8}), m), Error);
}

TEST(LossTest, CharbonnierOfEqualInputsIsSqrtEps) {
  const Tensor<double> a({1, 7, 5}, 0.37);
  EXPECT_EQ(Charbonnier(a, a, 1e-6), 1e-3);
  const Tensor<float> f({1, 4, 4}, 0.5f);
  EXPECT_EQ(Charbonnier(f, f, 1e-6), 1e-3f);
}

TEST(LossTest, CharbonnierConstantOffset) {
  const Tensor<double> p({1, 2, 2}, 0.6), t({1, 2, 2}, 0.5);
  EXPECT_NEAR(Charbonnier(p, t, 1e-6), std::sqrt(0.01 + 1e-6), 1e-15);
}

TEST(LossTest, CharbonnierGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  auto pred = RandomTensor<double>({1, 4, 4}, rng);
  const auto target = RandomTensor<double>({1, 4, 4}, rng);
  Tensor<double> g;
  Charbonnier(pred, target, 1e-6, &g);
  auto f = [&] { return Charbonnier(pred, target, 1e-6); };
  EXPECT_LT(testing::MaxTensorError(pred, g, f), 1e-4);
}

TEST(LossTest, MaskedLossIgnoresRawPixels) {
  std::mt19937_64 rng(5);
  const auto pred = RandomTensor<double>({1, 16, 16}, rng);
  const auto target = RandomTensor<double>({1, 16, 16}, rng);
  const MaskGrid m = BuildMask({0.75, 4, 1}, 16, 16);
  Tensor<double> g;
  const double base = MaskedCharbonnier(pred, target, m, 1e-6, &g);
  auto moved = pred;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      if (m.at(y, x)) moved.at(0, y, x) += 3.0;
  EXPECT_EQ(MaskedCharbonnier(moved, target, m, 1e-6), base);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      if (m.at(y, x)) {
        EXPECT_EQ(g.at(0, y, x), 0.0);
      }
    }
}

TEST(LossTest, MaskedLossNormalizesByCompressedPixels) {
  const Tensor<double> pred({1, 8, 8}, 0.2), target({1, 8, 8}, 0.0);
  const MaskGrid m = BuildMask({0.5, 4, 2}, 8, 8);
  EXPECT_NEAR(MaskedCharbonnier(pred, target, m, 1e-6), std::sqrt(0.04 + 1e-6), 1e-15);
}

TEST(LossTest, MaskedLossRejectsEmptySupport) {
  const Tensor<double> a({1, 8, 8});
  const MaskGrid all_raw(8, 8, 4, 1);
  try {
    MaskedCharbonnier(a, a, all_raw, 1e-6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmpty);
  }
}

TEST(ScheduleTest, PaperDefaultLookup) {
  const Schedule s = Schedule::PaperDefault();
  EXPECT_EQ(s.total_iterations(), 20000);
  EXPECT_EQ(ScheduleLookup(s, 0).patch_size, 32);
  EXPECT_EQ(ScheduleLookup(s, 4999).patch_size, 32);
  EXPECT_EQ(ScheduleLookup(s, 5000).patch_size, 16);
  EXPECT_EQ(ScheduleLookup(s, 10000).patch_size, 8);
  EXPECT_EQ(ScheduleLookup(s, 19999).patch_size, 4);
  EXPECT_DOUBLE_EQ(ScheduleLookup(s, 12345).ratio, 0.9);
  EXPECT_THROW(ScheduleLookup(s, 20000), Error);
  EXPECT_THROW(ScheduleLookup(s, -1), Error);
}

TEST(ScheduleTest, ProgressiveSplitsRemainderToLastPeriod) {
  const Schedule s = Schedule::Progressive({32, 16, 8, 4}, 0.9, 10);
  ASSERT_EQ(s.periods.size(), 4u);
  EXPECT_EQ(s.periods[0].iterations, 2);
  EXPECT_EQ(s.periods[3].iterations, 4);
  EXPECT_EQ(s.PeriodStart(3), 6);
}

TEST(ScheduleTest, TextRoundTrip) {
  const Schedule s{{{32, 0.9, 100}, {4, 0.807, 50}}};
  EXPECT_EQ(Schedule::Parse(s.ToString()), s);
  EXPECT_THROW(Schedule::Parse("32:0.9"), Error);
  EXPECT_THROW(Schedule::Parse("32:x:5"), Error);
}

TEST(ScheduleTest, ValidationAgainstCrop) {
  EXPECT_NO_THROW(Schedule::PaperDefault().Validate(128));
  EXPECT_THROW(Schedule::PaperDefault().Validate(48), Error);        // 32 does not divide 48
  EXPECT_THROW((Schedule{{{8, 1.0, 10}}}.Validate(64)), Error);       // no compressed pixels
  EXPECT_NO_THROW((Schedule{{{8, 1.0, 0}}}.Validate(64)));
  EXPECT_THROW((Schedule{{{8, 1.2, 10}}}.Validate(64)), Error);
}

}  // namespace
}  // namespace vig
