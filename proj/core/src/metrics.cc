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

#include "vig/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace vig {

namespace fs = std::filesystem;

double Psnr(const Frame& a, const Frame& b, double peak, double cap) {
  RequireSameShape(a.shape(), b.shape(), "Psnr");
  Require(!a.empty(), ErrorCode::kEmpty, "Psnr: empty frame");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(a.size());
  if (mse == 0.0) return cap;
  return std::min(cap, 10.0 * std::log10(peak * peak / mse));
}

namespace {

std::vector<double> GaussianWindow() {
  std::vector<double> g(kSsimWindow);
  const int r = kSsimWindow / 2;
  for (int i = 0; i < kSsimWindow; ++i) g[i] = std::exp(-0.5 * (i - r) * (i - r) / (kSsimSigma * kSsimSigma));
  const double s = std::accumulate(g.begin(), g.end(), 0.0);
  for (double& v : g) v /= s;
  return g;
}

// Valid separable filtering of an h x w map.
std::vector<double> FilterValid(const std::vector<double>& src, int h, int w, const std::vector<double>& g) {
  const int k = static_cast<int>(g.size());
  const int ow = w - k + 1, oh = h - k + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int i = 0; i < k; ++i) s += g[i] * src[static_cast<std::size_t>(y) * w + x + i];
      rows[static_cast<std::size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int i = 0; i < k; ++i) s += g[i] * rows[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace

double Ssim(const Frame& a, const Frame& b) {
  RequireSameShape(a.shape(), b.shape(), "Ssim");
  Require(a.rank() == 3 && a.dim(0) == 1, ErrorCode::kShape, "Ssim: expected 1xHxW frames");
  const int h = a.dim(1), w = a.dim(2);
  Require(h >= kSsimWindow && w >= kSsimWindow, ErrorCode::kShape,
          "Ssim: frame " + std::to_string(h) + "x" + std::to_string(w) + " is smaller than the " +
              std::to_string(kSsimWindow) + "x" + std::to_string(kSsimWindow) + " window");
  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const std::size_t n = a.size();
  std::vector<double> xa(n), xb(n), aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    xa[i] = a[i];
    xb[i] = b[i];
    aa[i] = xa[i] * xa[i];
    bb[i] = xb[i] * xb[i];
    ab[i] = xa[i] * xb[i];
  }
  const auto g = GaussianWindow();
  const auto mu_a = FilterValid(xa, h, w, g), mu_b = FilterValid(xb, h, w, g);
  const auto e_aa = FilterValid(aa, h, w, g), e_bb = FilterValid(bb, h, w, g), e_ab = FilterValid(ab, h, w, g);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double va = e_aa[i] - mu_a[i] * mu_a[i];
    const double vb = e_bb[i] - mu_b[i] * mu_b[i];
    const double cov = e_ab[i] - mu_a[i] * mu_b[i];
    total += ((2 * mu_a[i] * mu_b[i] + c1) * (2 * cov + c2)) /
             ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

double MeanPatchVariance(std::span<const Frame> frames, int patch) {
  Require(patch >= 1, ErrorCode::kRange, "MeanPatchVariance: patch must be >= 1");
  Require(!frames.empty(), ErrorCode::kEmpty, "MeanPatchVariance: no frames");
  double total = 0.0;
  std::size_t patches = 0;
  for (const Frame& f : frames) {
    const int h = f.dim(1), w = f.dim(2);
    Require(h >= patch && w >= patch, ErrorCode::kShape,
            "MeanPatchVariance: frame " + std::to_string(h) + "x" + std::to_string(w) + " is smaller than patch " +
                std::to_string(patch));
    for (int py = 0; py + patch <= h; py += patch)
      for (int px = 0; px + patch <= w; px += patch) {
        // Two passes so a constant patch gives exactly zero.
        const double count = static_cast<double>(patch) * patch;
        double sum = 0;
        for (int y = py; y < py + patch; ++y)
          for (int x = px; x < px + patch; ++x) sum += 255.0 * f.at(0, y, x);
        const double mean = sum / count;
        double sq = 0;
        for (int y = py; y < py + patch; ++y)
          for (int x = px; x < px + patch; ++x) {
            const double d = 255.0 * f.at(0, y, x) - mean;
            sq += d * d;
          }
        total += sq / count;
        ++patches;
      }
  }
  return total / static_cast<double>(patches);
}

namespace {

double Mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double PatchVarianceOrNan(std::span<const Frame> frames) {
  const Frame& f = frames.front();
  if (f.dim(1) < 64 || f.dim(2) < 64) return std::numeric_limits<double>::quiet_NaN();
  return MeanPatchVariance(frames, 64);
}

}  // namespace

MetricReport DeltaReport(std::span<const Frame> raw, std::span<const Frame> comp, std::span<const Frame> enhanced) {
  Require(raw.size() == comp.size() && raw.size() == enhanced.size(), ErrorCode::kShape,
          "DeltaReport: sequence lengths differ (raw " + std::to_string(raw.size()) + ", comp " +
              std::to_string(comp.size()) + ", enhanced " + std::to_string(enhanced.size()) + ")");
  Require(!raw.empty(), ErrorCode::kEmpty, "DeltaReport: empty sequences");
  MetricReport r;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    r.baseline_psnr.push_back(Psnr(comp[i], raw[i]));
    r.enhanced_psnr.push_back(Psnr(enhanced[i], raw[i]));
    r.baseline_ssim.push_back(Ssim(comp[i], raw[i]));
    r.enhanced_ssim.push_back(Ssim(enhanced[i], raw[i]));
  }
  r.mean_baseline_psnr = Mean(r.baseline_psnr);
  r.mean_enhanced_psnr = Mean(r.enhanced_psnr);
  r.mean_baseline_ssim = Mean(r.baseline_ssim);
  r.mean_enhanced_ssim = Mean(r.enhanced_ssim);
  r.delta_psnr = r.mean_enhanced_psnr - r.mean_baseline_psnr;
  r.delta_ssim = r.mean_enhanced_ssim - r.mean_baseline_ssim;
  r.patch_variance_raw = PatchVarianceOrNan(raw);
  r.patch_variance_baseline = PatchVarianceOrNan(comp);
  r.patch_variance_enhanced = PatchVarianceOrNan(enhanced);
  return r;
}

void WriteReport(const fs::path& path, const MetricReport& r) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, path.string() + ": cannot open for writing");
  out.precision(12);
  out << "index,baseline_psnr,enhanced_psnr,baseline_ssim,enhanced_ssim\n";
  for (std::size_t i = 0; i < r.frames(); ++i)
    out << i << ',' << r.baseline_psnr[i] << ',' << r.enhanced_psnr[i] << ',' << r.baseline_ssim[i] << ','
        << r.enhanced_ssim[i] << '\n';
  out << "# mean," << r.mean_baseline_psnr << ',' << r.mean_enhanced_psnr << ',' << r.mean_baseline_ssim << ','
      << r.mean_enhanced_ssim << '\n';
  out << "# delta," << r.delta_psnr << ',' << r.delta_ssim << '\n';
  out << "# patch_variance," << r.patch_variance_raw << ',' << r.patch_variance_baseline << ','
      << r.patch_variance_enhanced << '\n';
  char line[128];
  std::snprintf(line, sizeof line, "# \xCE\x94PSNR (dB) / \xCE\x94SSIM (\xC3\x97" "10\xE2\x81\xBB\xC2\xB2): %.2f / %.2f\n",
                r.delta_psnr, 100.0 * r.delta_ssim);
  out << line;
  if (!out) Fail(ErrorCode::kIo, path.string() + ": write failed");
}

namespace {

std::vector<double> SplitNumbers(const std::string& text, const fs::path& path, int line) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      values.push_back(std::stod(cell));
    } catch (const std::exception&) {
      Fail(ErrorCode::kParse, path.string() + ":" + std::to_string(line) + ": bad number '" + cell + "'");
    }
  }
  return values;
}

}  // namespace

MetricReport ReadReport(const fs::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, path.string() + ": cannot open report");
  MetricReport r;
  std::string text;
  int line = 0;
  bool have_mean = false;
  while (std::getline(in, text)) {
    ++line;
    if (line == 1 || text.empty()) continue;
    auto tagged = [&](const char* tag) { return text.rfind(tag, 0) == 0; };
    if (tagged("# mean,")) {
      auto v = SplitNumbers(text.substr(7), path, line);
      Require(v.size() == 4, ErrorCode::kParse, path.string() + ": malformed mean footer");
      r.mean_baseline_psnr = v[0], r.mean_enhanced_psnr = v[1], r.mean_baseline_ssim = v[2], r.mean_enhanced_ssim = v[3];
      have_mean = true;
    } else if (tagged("# delta,")) {
      auto v = SplitNumbers(text.substr(8), path, line);
      Require(v.size() == 2, ErrorCode::kParse, path.string() + ": malformed delta footer");
      r.delta_psnr = v[0], r.delta_ssim = v[1];
    } else if (tagged("# patch_variance,")) {
      auto v = SplitNumbers(text.substr(17), path, line);
      Require(v.size() == 3, ErrorCode::kParse, path.string() + ": malformed variance footer");
      r.patch_variance_raw = v[0], r.patch_variance_baseline = v[1], r.patch_variance_enhanced = v[2];
    } else if (text[0] != '#') {
      auto v = SplitNumbers(text, path, line);
      Require(v.size() == 5, ErrorCode::kParse, path.string() + ":" + std::to_string(line) + ": expected 5 columns");
      r.baseline_psnr.push_back(v[1]);
      r.enhanced_psnr.push_back(v[2]);
      r.baseline_ssim.push_back(v[3]);
      r.enhanced_ssim.push_back(v[4]);
    }
  }
  Require(have_mean && r.frames() > 0, ErrorCode::kParse, path.string() + ": report has no rows or footer");
  return r;
}

}  // namespace vig
