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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace vig {

namespace fs = std::filesystem;

std::size_t VideoDescriptor::frame_bytes() const {
  return static_cast<std::size_t>(width) * height * 3 / 2;
}

void VideoDescriptor::Validate() const {
  Require(width > 0 && height > 0 && width % 2 == 0 && height % 2 == 0, ErrorCode::kShape,
          path.string() + ": YUV420 needs positive even dimensions, got " + std::to_string(width) + "x" +
              std::to_string(height));
  Require(frame_count > 0, ErrorCode::kShape, path.string() + ": frame count must be positive");
  Require(bit_depth == 8, ErrorCode::kConfig, path.string() + ": only 8-bit video is supported");
}

namespace {

std::vector<std::uint8_t> ReadBytes(const VideoDescriptor& desc) {
  desc.Validate();
  std::error_code ec;
  const auto actual = fs::file_size(desc.path, ec);
  if (ec) Fail(ErrorCode::kIo, desc.path.string() + ": cannot stat file (" + ec.message() + ")");
  if (actual != desc.expected_bytes())
    Fail(ErrorCode::kIo, desc.path.string() + ": size mismatch, expected " + std::to_string(desc.expected_bytes()) +
                             " bytes for " + std::to_string(desc.frame_count) + " frames of " +
                             std::to_string(desc.width) + "x" + std::to_string(desc.height) + ", found " +
                             std::to_string(actual));
  std::ifstream in(desc.path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, desc.path.string() + ": cannot open for reading");
  std::vector<std::uint8_t> bytes(actual);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(actual));
  if (!in) Fail(ErrorCode::kIo, desc.path.string() + ": short read");
  return bytes;
}

Frame PlaneFromBytes(const std::uint8_t* src, int w, int h) {
  Frame f({1, h, w});
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<float>(src[i]) / 255.0f;
  return f;
}

}  // namespace

std::vector<YuvFrame> ReadYuv420(const VideoDescriptor& desc) {
  const std::vector<std::uint8_t> bytes = ReadBytes(desc);
  const std::size_t luma = static_cast<std::size_t>(desc.width) * desc.height;
  const std::size_t chroma = luma / 4;
  std::vector<YuvFrame> frames;
  frames.reserve(desc.frame_count);
  for (int t = 0; t < desc.frame_count; ++t) {
    const std::uint8_t* base = bytes.data() + t * desc.frame_bytes();
    frames.push_back({PlaneFromBytes(base, desc.width, desc.height),
                      PlaneFromBytes(base + luma, desc.width / 2, desc.height / 2),
                      PlaneFromBytes(base + luma + chroma, desc.width / 2, desc.height / 2)});
  }
  return frames;
}

std::vector<Frame> ReadLuma(const VideoDescriptor& desc) {
  std::vector<Frame> out;
  for (auto& f : ReadYuv420(desc)) out.push_back(std::move(f.y));
  return out;
}

std::uint8_t QuantizeSample(float v) {
  const double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

void WriteYuv420(const fs::path& path, const std::vector<YuvFrame>& frames) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, path.string() + ": cannot open for writing");
  std::vector<std::uint8_t> buf;
  for (const auto& f : frames) {
    const int h = f.y.dim(1), w = f.y.dim(2);
    Require(f.u.shape() == Shape({1, h / 2, w / 2}) && f.v.shape() == f.u.shape(), ErrorCode::kShape,
            path.string() + ": chroma planes must be half the luma size");
    buf.clear();
    for (const Frame* p : {&f.y, &f.u, &f.v})
      for (float v : p->vec()) buf.push_back(QuantizeSample(v));
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) Fail(ErrorCode::kIo, path.string() + ": write failed");
}

void DegraderConfig::Validate() const {
  Require(block_size >= 1, ErrorCode::kConfig, "degrader block size must be >= 1");
  Require(q > 0.0 && std::isfinite(q), ErrorCode::kConfig, "degrader q must be positive, got " + std::to_string(q));
}

Frame SynthDegrade(const Frame& frame, const DegraderConfig& cfg) {
  cfg.Validate();
  const int n = cfg.block_size;
  Require(frame.rank() == 3 && frame.dim(0) == 1, ErrorCode::kShape,
          "SynthDegrade: expected 1xHxW frame, got " + ShapeString(frame.shape()));
  const int h = frame.dim(1), w = frame.dim(2);
  Require(h % n == 0 && w % n == 0, ErrorCode::kShape,
          "SynthDegrade: block size " + std::to_string(n) + " does not divide " + std::to_string(h) + "x" +
              std::to_string(w));

  // Orthonormal DCT-II basis, basis[k][i].
  std::vector<double> basis(n * n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      basis[k * n + i] = (k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n)) *
                         std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));

  Frame out(frame.shape());
  std::vector<double> block(n * n), tmp(n * n), coef(n * n);
  for (int by = 0; by < h; by += n) {
    for (int bx = 0; bx < w; bx += n) {
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) block[y * n + x] = 255.0 * frame.at(0, by + y, bx + x);
      // coef = B * block * B^T
      for (int k = 0; k < n; ++k)
        for (int x = 0; x < n; ++x) {
          double s = 0;
          for (int y = 0; y < n; ++y) s += basis[k * n + y] * block[y * n + x];
          tmp[k * n + x] = s;
        }
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0;
          for (int x = 0; x < n; ++x) s += tmp[k * n + x] * basis[l * n + x];
          coef[k * n + l] = std::round(s / cfg.q) * cfg.q;
        }
      // block = B^T * coef * B
      for (int y = 0; y < n; ++y)
        for (int l = 0; l < n; ++l) {
          double s = 0;
          for (int k = 0; k < n; ++k) s += basis[k * n + y] * coef[k * n + l];
          tmp[y * n + l] = s;
        }
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          double s = 0;
          for (int l = 0; l < n; ++l) s += tmp[y * n + l] * basis[l * n + x];
          out.at(0, by + y, bx + x) = static_cast<float>(std::clamp(s / 255.0, 0.0, 1.0));
        }
    }
  }
  return out;
}

namespace {

[[noreturn]] void ManifestError(const fs::path& path, int line, const std::string& what) {
  Fail(ErrorCode::kParse, path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<ManifestEntry> ReadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, path.string() + ": cannot open manifest");
  const fs::path base = path.parent_path();
  std::vector<ManifestEntry> entries;
  std::string text;
  int line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos || text[first] == '#') continue;
    std::istringstream is(text);
    ManifestEntry e;
    std::string raw, comp, extra;
    if (!(is >> e.name >> e.width >> e.height >> e.frames >> raw >> comp))
      ManifestError(path, line_no, "expected `name width height frames raw_path comp_path_or_DEGRADE:q`");
    if (is >> extra) ManifestError(path, line_no, "unexpected trailing field '" + extra + "'");
    if (e.width <= 0 || e.height <= 0 || e.frames <= 0)
      ManifestError(path, line_no, "width, height and frames must be positive");
    e.line = line_no;
    e.raw_path = fs::path(raw).is_absolute() ? fs::path(raw) : base / raw;
    if (comp.rfind("DEGRADE:", 0) == 0) {
      try {
        std::size_t used = 0;
        e.degrade_q = std::stod(comp.substr(8), &used);
        if (used != comp.size() - 8) throw std::invalid_argument(comp);
      } catch (const std::exception&) {
        ManifestError(path, line_no, "malformed degrade level '" + comp + "'");
      }
      if (!(*e.degrade_q > 0)) ManifestError(path, line_no, "degrade level must be positive");
    } else {
      e.comp_path = fs::path(comp).is_absolute() ? fs::path(comp) : base / comp;
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void WriteManifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path base = fs::absolute(path).parent_path();
  auto rel = [&](const fs::path& p) { return fs::absolute(p).lexically_normal().lexically_relative(base).generic_string(); };
  std::ofstream out(path, std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, path.string() + ": cannot open for writing");
  out << "# name width height frames raw_path comp_path_or_DEGRADE:q\n";
  for (const auto& e : entries) {
    out << e.name << ' ' << e.width << ' ' << e.height << ' ' << e.frames << ' ' << rel(e.raw_path) << ' ';
    if (e.degrade_q) {
      std::ostringstream q;
      q << *e.degrade_q;
      out << "DEGRADE:" << q.str() << '\n';
    } else {
      out << rel(e.comp_path) << '\n';
    }
  }
  if (!out) Fail(ErrorCode::kIo, path.string() + ": write failed");
}

Video LoadVideo(const ManifestEntry& e) {
  Video v;
  v.name = e.name;
  v.raw = ReadLuma(e.raw());
  if (e.degrade_q) {
    DegraderConfig cfg;
    cfg.q = *e.degrade_q;
    for (const auto& f : v.raw) v.comp.push_back(SynthDegrade(f, cfg));
  } else {
    v.comp = ReadLuma(e.comp());
  }
  return v;
}

Corpus LoadCorpus(const std::vector<ManifestEntry>& entries) {
  Corpus corpus;
  for (const auto& e : entries) corpus.push_back(LoadVideo(e));
  return corpus;
}

PairedClip SampleClip(const Corpus& corpus, int clip_len, std::uint64_t seed) {
  Require(!corpus.empty(), ErrorCode::kEmpty, "SampleClip: empty corpus");
  Require(clip_len >= 1, ErrorCode::kRange, "SampleClip: clip length must be >= 1");
  for (const auto& v : corpus)
    Require(static_cast<int>(v.raw.size()) >= clip_len && v.comp.size() == v.raw.size(), ErrorCode::kEmpty,
            "SampleClip: video '" + v.name + "' has " + std::to_string(v.raw.size()) + " frames, fewer than clip length " +
                std::to_string(clip_len));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_video(0, corpus.size() - 1);
  const Video& v = corpus[pick_video(rng)];
  std::uniform_int_distribution<int> pick_start(0, static_cast<int>(v.raw.size()) - clip_len);
  PairedClip clip;
  clip.video = v.name;
  clip.start = pick_start(rng);
  clip.raw.assign(v.raw.begin() + clip.start, v.raw.begin() + clip.start + clip_len);
  clip.comp.assign(v.comp.begin() + clip.start, v.comp.begin() + clip.start + clip_len);
  return clip;
}

namespace {

Frame CropFrame(const Frame& f, int top, int left, int size) {
  Frame out({1, size, size});
  for (int y = 0; y < size; ++y)
    std::copy_n(&f.at(0, top + y, left), size, &out.at(0, y, 0));
  return out;
}

}  // namespace

PairedClip CropPair(const PairedClip& clip, int size, std::uint64_t seed) {
  Require(!clip.raw.empty(), ErrorCode::kEmpty, "CropPair: empty clip");
  const int h = clip.raw.front().dim(1), w = clip.raw.front().dim(2);
  Require(h >= size && w >= size, ErrorCode::kShape,
          "CropPair: frame " + std::to_string(h) + "x" + std::to_string(w) + " is smaller than crop " +
              std::to_string(size));
  std::mt19937_64 rng(seed);
  const int top = std::uniform_int_distribution<int>(0, h - size)(rng);
  const int left = std::uniform_int_distribution<int>(0, w - size)(rng);
  PairedClip out;
  out.video = clip.video;
  out.start = clip.start;
  for (std::size_t i = 0; i < clip.raw.size(); ++i) {
    RequireSameShape(clip.raw[i].shape(), clip.comp[i].shape(), "CropPair");
    out.raw.push_back(CropFrame(clip.raw[i], top, left, size));
    out.comp.push_back(CropFrame(clip.comp[i], top, left, size));
  }
  return out;
}

Augmentation Augmentation::Sample(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int idx = std::uniform_int_distribution<int>(0, 11)(rng);
  return {static_cast<Flip>(idx / 4), idx % 4};
}

Frame ApplyAugmentation(const Frame& frame, const Augmentation& aug) {
  const int h = frame.dim(1), w = frame.dim(2);
  const int turns = ((aug.quarter_turns % 4) + 4) % 4;
  Require(turns % 2 == 0 || h == w, ErrorCode::kShape,
          "augment: 90/270 degree rotation needs a square frame, got " + std::to_string(h) + "x" + std::to_string(w));
  Frame flipped(frame.shape());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int sy = aug.flip == Flip::kVertical ? h - 1 - y : y;
      const int sx = aug.flip == Flip::kHorizontal ? w - 1 - x : x;
      flipped.at(0, y, x) = frame.at(0, sy, sx);
    }
  if (turns == 0) return flipped;
  Frame out(flipped.shape());
  if (turns == 2) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(0, y, x) = flipped.at(0, h - 1 - y, w - 1 - x);
    return out;
  }
  // Square from here. Counter-clockwise quarter turn: out(y, x) = in(x, n-1-y);
  // three quarter turns: out(y, x) = in(n-1-x, y).
  const int n = h;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      out.at(0, y, x) = turns == 1 ? flipped.at(0, x, n - 1 - y) : flipped.at(0, n - 1 - x, y);
  return out;
}

PairedClip AugmentPair(const PairedClip& clip, const Augmentation& aug) {
  PairedClip out;
  out.video = clip.video;
  out.start = clip.start;
  for (std::size_t i = 0; i < clip.raw.size(); ++i) {
    out.raw.push_back(ApplyAugmentation(clip.raw[i], aug));
    out.comp.push_back(ApplyAugmentation(clip.comp[i], aug));
  }
  return out;
}

PairedClip AugmentPair(const PairedClip& clip, std::uint64_t seed) {
  return AugmentPair(clip, Augmentation::Sample(seed));
}

std::uint64_t DeriveSeed(std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(a ^ mix(b));
}

std::vector<Frame> SynthesizeVideo(int width, int height, int frames, std::uint64_t seed) {
  Require(width > 0 && height > 0 && frames > 0, ErrorCode::kRange, "SynthesizeVideo: non-positive size");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  // Per-frame sensor grain. Without it nearly every block coefficient
  // survives quantization and the degrader adds rather than removes energy.
  constexpr double kGrain = 4.0 / 255.0;
  constexpr double kEdge = 1.5;  // edge softness of the moving shapes, pixels

  struct Grating {
    double kx, ky, phase, amp;
  };
  std::vector<Grating> gratings;
  double power = 0.0;
  for (int i = 0; i < 24; ++i) {
    const double freq = std::exp(std::log(1.0 / 64) + unit(rng) * (std::log(1.0 / 8) - std::log(1.0 / 64)));
    const double theta = unit(rng) * std::numbers::pi;
    const double amp = 1.0 / (freq * 64.0);
    gratings.push_back({kTwoPi * freq * std::cos(theta), kTwoPi * freq * std::sin(theta), kTwoPi * unit(rng), amp});
    power += amp * amp / 2;
  }
  const double norm = 0.12 / std::sqrt(power);
  const double vx = 3.0 * unit(rng) - 1.5, vy = 3.0 * unit(rng) - 1.5;

  struct Shape2 {
    double cx, cy, rx, ry, vx, vy, level;
    bool disc;
  };
  std::vector<Shape2> shapes;
  for (int i = 0; i < 3; ++i)
    shapes.push_back({unit(rng) * width, unit(rng) * height, (0.08 + 0.15 * unit(rng)) * width,
                      (0.08 + 0.15 * unit(rng)) * height, 4.0 * unit(rng) - 2.0, 4.0 * unit(rng) - 2.0,
                      0.3 * unit(rng) - 0.15, unit(rng) < 0.5});
  auto soft = [](double inside_px) { return 0.5 * (1.0 + std::tanh(inside_px / kEdge)); };

  std::normal_distribution<double> grain(0.0, kGrain);
  std::vector<Frame> out;
  for (int t = 0; t < frames; ++t) {
    Frame f({1, height, width});
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double px = x - vx * t, py = y - vy * t;
        double s = 0.0;
        for (const auto& g : gratings) s += g.amp * std::sin(g.kx * px + g.ky * py + g.phase);
        double v = 0.5 + norm * s;
        for (const auto& sh : shapes) {
          const double dx = x - sh.cx - sh.vx * t, dy = y - sh.cy - sh.vy * t;
          double w;
          if (sh.disc) {
            const double r = std::min(sh.rx, sh.ry);
            w = soft(r - std::hypot(dx, dy));
          } else {
            w = soft(sh.rx - std::abs(dx)) * soft(sh.ry - std::abs(dy));
          }
          v += sh.level * w;
        }
        v += grain(rng);
        f.at(0, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace vig
