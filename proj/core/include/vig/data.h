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

#ifndef VIG_DATA_H_
#define VIG_DATA_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vig/tensor.h"

namespace vig {

// Luma (or chroma) plane, 1 x H x W, values in [0, 1].
using Frame = Tensor<float>;

struct YuvFrame {
  Frame y, u, v;
};

// Headerless 8-bit YUV420 planar file.
struct VideoDescriptor {
  std::filesystem::path path;
  int width = 0;
  int height = 0;
  int frame_count = 0;
  int bit_depth = 8;

  std::size_t frame_bytes() const;
  std::size_t expected_bytes() const { return frame_bytes() * static_cast<std::size_t>(frame_count); }
  void Validate() const;
};

std::vector<YuvFrame> ReadYuv420(const VideoDescriptor& desc);
std::vector<Frame> ReadLuma(const VideoDescriptor& desc);
// Clamps to [0, 1] and rounds to the nearest 8-bit code value.
void WriteYuv420(const std::filesystem::path& path, const std::vector<YuvFrame>& frames);
std::uint8_t QuantizeSample(float v);

// Block-transform degrader standing in for a real codec.
struct DegraderConfig {
  int block_size = 8;
  double q = 16.0;  // quantizer step in 8-bit code values

  void Validate() const;
};

// Per block: orthonormal 2-D DCT of the 0-255 scaled samples, coefficients
// snapped to round(c / q) * q, inverse DCT, rescale and clamp to [0, 1].
Frame SynthDegrade(const Frame& frame, const DegraderConfig& cfg);

// ---- Corpus.

// One manifest record: `name width height frames raw_path comp`, where comp
// is a YUV path or DEGRADE:<q>.
struct ManifestEntry {
  std::string name;
  int width = 0;
  int height = 0;
  int frames = 0;
  std::filesystem::path raw_path;
  std::filesystem::path comp_path;
  std::optional<double> degrade_q;
  int line = 0;

  VideoDescriptor raw() const { return {raw_path, width, height, frames, 8}; }
  VideoDescriptor comp() const { return {comp_path, width, height, frames, 8}; }
};

// Relative paths resolve against the manifest's directory. Blank lines and
// lines starting with '#' are ignored.
std::vector<ManifestEntry> ReadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

struct Video {
  std::string name;
  std::vector<Frame> raw;
  std::vector<Frame> comp;
};

using Corpus = std::vector<Video>;

Video LoadVideo(const ManifestEntry& entry);
Corpus LoadCorpus(const std::vector<ManifestEntry>& entries);

struct PairedClip {
  std::vector<Frame> raw;
  std::vector<Frame> comp;
  std::string video;
  int start = 0;
};

// Uniform video, then uniform start offset.
PairedClip SampleClip(const Corpus& corpus, int clip_len, std::uint64_t seed);
// One random top-left offset shared by every frame of both streams.
PairedClip CropPair(const PairedClip& clip, int size, std::uint64_t seed);

enum class Flip { kNone, kHorizontal, kVertical };

struct Augmentation {
  Flip flip = Flip::kNone;
  int quarter_turns = 0;  // counter-clockwise

  static Augmentation Sample(std::uint64_t seed);  // uniform over 3 x 4 transforms
};

Frame ApplyAugmentation(const Frame& frame, const Augmentation& aug);
PairedClip AugmentPair(const PairedClip& clip, const Augmentation& aug);
PairedClip AugmentPair(const PairedClip& clip, std::uint64_t seed);

// ---- Synthetic raw video: translating sums of oriented gratings with 1/f
// amplitudes, a few moving soft-edged shapes and per-frame grain.
std::vector<Frame> SynthesizeVideo(int width, int height, int frames, std::uint64_t seed);

// Mixes two values into a new 64-bit seed (splitmix64 finalizer).
std::uint64_t DeriveSeed(std::uint64_t a, std::uint64_t b);

}  // namespace vig

#endif  // VIG_DATA_H_
