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

#include "vig/data.h"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "test_util.h"

namespace vig {
namespace {

using testing::RandomTensor;
using testing::TempDir;

double Mse(const Frame& a, const Frame& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
  return s / a.size();
}

Frame Quantized(Frame f) {
  for (auto& v : f.vec()) v = QuantizeSample(v) / 255.0f;
  return f;
}

YuvFrame RandomYuv(int w, int h, std::mt19937_64& rng) {
  return {Quantized(RandomTensor<float>({1, h, w}, rng, 0.0, 1.0)),
          Quantized(RandomTensor<float>({1, h / 2, w / 2}, rng, 0.0, 1.0)),
          Quantized(RandomTensor<float>({1, h / 2, w / 2}, rng, 0.0, 1.0))};
}

void WriteText(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

template <typename F>
ErrorCode CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected vig::Error";
  return ErrorCode::kEmpty;
}

template <typename F>
std::string MessageOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected vig::Error";
  return {};
}

TEST(YuvTest, RoundTripIsExact) {
  TempDir dir("yuv");
  std::mt19937_64 rng(3);
  std::vector<YuvFrame> frames;
  for (int t = 0; t < 3; ++t) frames.push_back(RandomYuv(8, 6, rng));
  WriteYuv420(dir / "a.yuv", frames);
  EXPECT_EQ(std::filesystem::file_size(dir / "a.yuv"), 3u * 8 * 6 * 3 / 2);
  const auto back = ReadYuv420({dir / "a.yuv", 8, 6, 3, 8});
  ASSERT_EQ(back.size(), 3u);
  for (int t = 0; t < 3; ++t) {
    EXPECT_EQ(back[t].y.vec(), frames[t].y.vec());
    EXPECT_EQ(back[t].u.vec(), frames[t].u.vec());
    EXPECT_EQ(back[t].v.vec(), frames[t].v.vec());
  }
  const auto luma = ReadLuma({dir / "a.yuv", 8, 6, 3, 8});
  EXPECT_EQ(luma[2].vec(), frames[2].y.vec());
}

TEST(YuvTest, QuantizeClampsAndRounds) {
  EXPECT_EQ(QuantizeSample(-0.5f), 0);
  EXPECT_EQ(QuantizeSample(2.0f), 255);
  EXPECT_EQ(QuantizeSample(100.4f / 255.0f), 100);
  EXPECT_EQ(QuantizeSample(100.6f / 255.0f), 101);
}

TEST(YuvTest, SizeMismatchIsAnIoErrorWithDetails) {
  TempDir dir("yuv_size");
  std::mt19937_64 rng(4);
  WriteYuv420(dir / "a.yuv", {RandomYuv(8, 6, rng)});
  const std::string msg = MessageOf([&] { ReadLuma({dir / "a.yuv", 8, 6, 2, 8}); });
  EXPECT_NE(msg.find("size mismatch"), std::string::npos);
  EXPECT_NE(msg.find("144"), std::string::npos);
  EXPECT_EQ(CodeOf([&] { ReadLuma({dir / "a.yuv", 8, 6, 2, 8}); }), ErrorCode::kIo);
  EXPECT_EQ(CodeOf([&] { ReadLuma({dir / "missing.yuv", 8, 6, 1, 8}); }), ErrorCode::kIo);
}

TEST(YuvTest, RejectsOddDimensionsAndHighBitDepth) {
  EXPECT_EQ(CodeOf([] { VideoDescriptor{"x", 7, 6, 1, 8}.Validate(); }), ErrorCode::kShape);
  EXPECT_EQ(CodeOf([] { VideoDescriptor{"x", 8, 6, 0, 8}.Validate(); }), ErrorCode::kShape);
  EXPECT_EQ(CodeOf([] { VideoDescriptor{"x", 8, 6, 1, 10}.Validate(); }), ErrorCode::kConfig);
}

TEST(DegraderTest, TinyStepIsNearIdentity) {
  std::mt19937_64 rng(5);
  const Frame f = RandomTensor<float>({1, 16, 24}, rng, 0.0, 1.0);
  DegraderConfig cfg;
  cfg.q = 1e-9;
  const Frame d = SynthDegrade(f, cfg);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(d[i], f[i], 1e-6);
}

TEST(DegraderTest, ConstantBlockSnapsItsDcCoefficient) {
  // A constant 127.5 block has DC 8 * 127.5 = 1020; with q = 16 it snaps to
  // 64 * 16 = 1024, i.e. every sample becomes 128.
  const Frame f({1, 8, 16}, 0.5f);
  DegraderConfig cfg;
  cfg.q = 16;
  const Frame d = SynthDegrade(f, cfg);
  for (float v : d.vec()) EXPECT_NEAR(v, 128.0 / 255.0, 1e-6);
}

TEST(DegraderTest, ErrorGrowsWithStep) {
  const auto frames = SynthesizeVideo(64, 64, 2, 11);
  double prev = -1;
  for (double q : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
    DegraderConfig cfg;
    cfg.q = q;
    double mse = 0;
    for (const auto& f : frames) mse += Mse(SynthDegrade(f, cfg), f);
    EXPECT_GT(mse, prev) << "q=" << q;
    prev = mse;
  }
}

TEST(DegraderTest, RejectsBadConfigAndShapes) {
  DegraderConfig cfg;
  cfg.q = 0;
  EXPECT_EQ(CodeOf([&] { cfg.Validate(); }), ErrorCode::kConfig);
  cfg.q = 8;
  EXPECT_EQ(CodeOf([&] { SynthDegrade(Frame({1, 12, 16}), cfg); }), ErrorCode::kShape);
}

TEST(ManifestTest, ParsesEntriesAndResolvesRelativePaths) {
  TempDir dir("manifest");
  WriteText(dir / "m.txt",
            "# header\n\n"
            "a 16 8 3 raw/a.yuv comp/a.yuv\n"
            "  b 32 32 5 /abs/b.yuv DEGRADE:24\n");
  const auto entries = ReadManifest(dir / "m.txt");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].name, "a");
  EXPECT_EQ(entries[0].width, 16);
  EXPECT_EQ(entries[0].height, 8);
  EXPECT_EQ(entries[0].frames, 3);
  EXPECT_EQ(entries[0].raw_path, dir.path() / "raw/a.yuv");
  EXPECT_EQ(entries[0].comp_path, dir.path() / "comp/a.yuv");
  EXPECT_EQ(entries[0].line, 3);
  EXPECT_FALSE(entries[0].degrade_q);
  EXPECT_EQ(entries[1].raw_path, "/abs/b.yuv");
  ASSERT_TRUE(entries[1].degrade_q);
  EXPECT_EQ(*entries[1].degrade_q, 24.0);
  EXPECT_EQ(entries[1].line, 4);
}

TEST(ManifestTest, ErrorsNameTheLine) {
  TempDir dir("manifest_err");
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"a 16 8 3 raw.yuv\n", ":1:"},
      {"# c\na 16 8 3 raw.yuv comp.yuv extra\n", ":2:"},
      {"\n\na 16 -8 3 raw.yuv comp.yuv\n", ":3:"},
      {"a 16 8 3 raw.yuv DEGRADE:abc\n", ":1:"},
      {"a 16 8 3 raw.yuv DEGRADE:0\n", ":1:"},
  };
  for (const auto& [text, where] : cases) {
    WriteText(dir / "m.txt", text);
    try {
      ReadManifest(dir / "m.txt");
      ADD_FAILURE() << "accepted: " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParse);
      EXPECT_NE(std::string(e.what()).find("m.txt" + where), std::string::npos) << e.what();
    }
  }
  EXPECT_EQ(CodeOf([&] { ReadManifest(dir / "none.txt"); }), ErrorCode::kIo);
}

TEST(ManifestTest, WriteThenReadRoundTrips) {
  TempDir dir("manifest_rt");
  std::vector<ManifestEntry> in(2);
  in[0] = {"x@q24", 16, 8, 2, dir / "raw/x.yuv", dir / "comp/x_q24.yuv", std::nullopt, 0};
  in[1] = {"y", 16, 8, 2, dir / "raw/y.yuv", {}, 12.5, 0};
  WriteManifest(dir / "sub/../m.txt", in);
  const auto out = ReadManifest(dir / "m.txt");
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].name, "x@q24");
  EXPECT_EQ(std::filesystem::weakly_canonical(out[0].comp_path),
            std::filesystem::weakly_canonical(in[0].comp_path));
  EXPECT_EQ(*out[1].degrade_q, 12.5);
}

TEST(CorpusTest, LoadsDegradedAndStoredPairs) {
  TempDir dir("corpus");
  const auto raw = SynthesizeVideo(16, 16, 3, 2);
  std::vector<YuvFrame> yuv;
  for (const auto& f : raw) yuv.push_back({f, Frame({1, 8, 8}, 0.5f), Frame({1, 8, 8}, 0.5f)});
  WriteYuv420(dir / "r.yuv", yuv);
  ManifestEntry e{"v", 16, 16, 3, dir / "r.yuv", {}, 16.0, 1};
  const Video v = LoadVideo(e);
  ASSERT_EQ(v.raw.size(), 3u);
  DegraderConfig cfg;
  cfg.q = 16;
  EXPECT_EQ(v.comp[1].vec(), SynthDegrade(v.raw[1], cfg).vec());
  e.degrade_q.reset();
  e.comp_path = dir / "r.yuv";
  EXPECT_EQ(LoadVideo(e).comp[2].vec(), v.raw[2].vec());
}

Corpus SmallCorpus() {
  Corpus c;
  for (int k = 0; k < 3; ++k) {
    Video v;
    v.name = "v" + std::to_string(k);
    v.raw = SynthesizeVideo(16, 16, 5 + k, k);
    for (const auto& f : v.raw) v.comp.push_back(Frame(f.shape(), 0.25f * k));
    c.push_back(std::move(v));
  }
  return c;
}

TEST(SamplingTest, ClipsAreDeterministicAndCoverTheCorpus) {
  const Corpus c = SmallCorpus();
  std::set<std::string> seen;
  std::set<int> starts;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const PairedClip a = SampleClip(c, 4, s), b = SampleClip(c, 4, s);
    EXPECT_EQ(a.video, b.video);
    EXPECT_EQ(a.start, b.start);
    ASSERT_EQ(a.raw.size(), 4u);
    const Video& v = c[a.video[1] - '0'];
    EXPECT_LE(a.start + 4, static_cast<int>(v.raw.size()));
    EXPECT_EQ(a.raw[0].vec(), v.raw[a.start].vec());
    EXPECT_EQ(a.comp[3].vec(), v.comp[a.start + 3].vec());
    seen.insert(a.video);
    starts.insert(a.start);
  }
  EXPECT_EQ(seen.size(), 3u);
  EXPECT_EQ(starts, (std::set<int>{0, 1, 2, 3}));
}

TEST(SamplingTest, RejectsClipsLongerThanAVideo) {
  const Corpus c = SmallCorpus();
  EXPECT_EQ(CodeOf([&] { SampleClip(c, 6, 0); }), ErrorCode::kEmpty);
  EXPECT_EQ(CodeOf([&] { SampleClip({}, 2, 0); }), ErrorCode::kEmpty);
}

TEST(SamplingTest, CropSharesOneOffsetAcrossFramesAndStreams) {
  PairedClip clip;
  for (int t = 0; t < 3; ++t) {
    Frame r({1, 10, 12}), c({1, 10, 12});
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 12; ++x) {
        r.at(0, y, x) = float(100 * t + 12 * y + x);
        c.at(0, y, x) = -r.at(0, y, x);
      }
    clip.raw.push_back(r);
    clip.comp.push_back(c);
  }
  std::set<std::pair<int, int>> offsets;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const PairedClip out = CropPair(clip, 4, s);
    EXPECT_EQ(out.raw[0].shape(), Shape({1, 4, 4}));
    const int v0 = static_cast<int>(out.raw[0].at(0, 0, 0));
    const int top = v0 / 12, left = v0 % 12;
    offsets.insert({top, left});
    for (int t = 0; t < 3; ++t)
      for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
          EXPECT_EQ(out.raw[t].at(0, y, x), clip.raw[t].at(0, top + y, left + x));
          EXPECT_EQ(out.comp[t].at(0, y, x), clip.comp[t].at(0, top + y, left + x));
        }
    EXPECT_EQ(CropPair(clip, 4, s).raw[1].vec(), out.raw[1].vec());
  }
  EXPECT_GT(offsets.size(), 30u);
  EXPECT_EQ(CodeOf([&] { CropPair(clip, 11, 0); }), ErrorCode::kShape);
}

TEST(AugmentTest, TransformsMatchExplicitIndexMaps) {
  Frame f({1, 3, 3});
  for (int i = 0; i < 9; ++i) f[i] = float(i);
  // 0 1 2 / 3 4 5 / 6 7 8
  auto rows = [](const Frame& g) { return std::vector<float>(g.vec().begin(), g.vec().end()); };
  EXPECT_EQ(rows(ApplyAugmentation(f, {Flip::kNone, 0})), rows(f));
  EXPECT_EQ(rows(ApplyAugmentation(f, {Flip::kHorizontal, 0})), (std::vector<float>{2, 1, 0, 5, 4, 3, 8, 7, 6}));
  EXPECT_EQ(rows(ApplyAugmentation(f, {Flip::kVertical, 0})), (std::vector<float>{6, 7, 8, 3, 4, 5, 0, 1, 2}));
  EXPECT_EQ(rows(ApplyAugmentation(f, {Flip::kNone, 1})), (std::vector<float>{2, 5, 8, 1, 4, 7, 0, 3, 6}));
  EXPECT_EQ(rows(ApplyAugmentation(f, {Flip::kNone, 2})), (std::vector<float>{8, 7, 6, 5, 4, 3, 2, 1, 0}));
  EXPECT_EQ(rows(ApplyAugmentation(f, {Flip::kNone, 3})), (std::vector<float>{6, 3, 0, 7, 4, 1, 8, 5, 2}));
  EXPECT_EQ(rows(ApplyAugmentation(f, {Flip::kHorizontal, 1})), (std::vector<float>{0, 3, 6, 1, 4, 7, 2, 5, 8}));
}

TEST(AugmentTest, OddTurnsNeedSquareFrames) {
  EXPECT_EQ(CodeOf([] { ApplyAugmentation(Frame({1, 2, 4}), {Flip::kNone, 1}); }), ErrorCode::kShape);
  EXPECT_EQ(ApplyAugmentation(Frame({1, 2, 4}), {Flip::kVertical, 2}).shape(), Shape({1, 2, 4}));
}

TEST(AugmentTest, SamplingCoversAllTwelveTransforms) {
  std::set<std::pair<int, int>> seen;
  for (std::uint64_t s = 0; s < 500; ++s) {
    const auto a = Augmentation::Sample(s);
    const auto b = Augmentation::Sample(s);
    EXPECT_EQ(a.flip, b.flip);
    EXPECT_EQ(a.quarter_turns, b.quarter_turns);
    seen.insert({static_cast<int>(a.flip), a.quarter_turns});
  }
  EXPECT_EQ(seen.size(), 12u);
}

TEST(AugmentTest, PairUsesOneTransformForBothStreams) {
  PairedClip clip;
  std::mt19937_64 rng(8);
  for (int t = 0; t < 2; ++t) {
    clip.raw.push_back(RandomTensor<float>({1, 5, 5}, rng, 0.0, 1.0));
    clip.comp.push_back(RandomTensor<float>({1, 5, 5}, rng, 0.0, 1.0));
  }
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto aug = Augmentation::Sample(s);
    const PairedClip out = AugmentPair(clip, s);
    for (int t = 0; t < 2; ++t) {
      EXPECT_EQ(out.raw[t].vec(), ApplyAugmentation(clip.raw[t], aug).vec());
      EXPECT_EQ(out.comp[t].vec(), ApplyAugmentation(clip.comp[t], aug).vec());
    }
  }
}

TEST(SynthesisTest, DeterministicInRangeAndMoving) {
  const auto a = SynthesizeVideo(32, 24, 4, 9), b = SynthesizeVideo(32, 24, 4, 9);
  const auto c = SynthesizeVideo(32, 24, 4, 10);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(a[0].shape(), Shape({1, 24, 32}));
  for (int t = 0; t < 4; ++t) EXPECT_EQ(a[t].vec(), b[t].vec());
  EXPECT_NE(a[0].vec(), c[0].vec());
  EXPECT_NE(a[0].vec(), a[1].vec());
  for (const auto& f : a)
    for (float v : f.vec()) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
    }
}

TEST(SeedTest, DeriveSeedSeparatesStreams) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t a = 0; a < 30; ++a)
    for (std::uint64_t b = 0; b < 30; ++b) seeds.insert(DeriveSeed(a, b));
  EXPECT_EQ(seeds.size(), 900u);
  EXPECT_EQ(DeriveSeed(1, 2), DeriveSeed(1, 2));
  EXPECT_NE(DeriveSeed(1, 2), DeriveSeed(2, 1));
}

}  // namespace
}  // namespace vig
