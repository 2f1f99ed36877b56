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

#ifndef VIG_METRICS_H_
#define VIG_METRICS_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vig/data.h"

namespace vig {

inline constexpr double kPsnrCap = 100.0;
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

// 10 log10(peak^2 / MSE), or `cap` when the frames are identical.
double Psnr(const Frame& a, const Frame& b, double peak = 1.0, double cap = kPsnrCap);

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
// peak 1, averaged over all positions where the window fits.
double Ssim(const Frame& a, const Frame& b);

// Mean over every aligned, non-overlapping patch x patch tile of every frame
// of the population variance of its samples on the 0-255 scale. Partial
// tiles at the right and bottom edges are discarded.
double MeanPatchVariance(std::span<const Frame> frames, int patch = 64);

struct MetricReport {
  std::vector<double> baseline_psnr, enhanced_psnr;
  std::vector<double> baseline_ssim, enhanced_ssim;
  double mean_baseline_psnr = 0, mean_enhanced_psnr = 0;
  double mean_baseline_ssim = 0, mean_enhanced_ssim = 0;
  double delta_psnr = 0;  // dB
  double delta_ssim = 0;  // unitless; reports print it scaled by 100
  // Mean 64x64 patch variance, NaN when frames are smaller than a patch.
  double patch_variance_raw = 0, patch_variance_baseline = 0, patch_variance_enhanced = 0;

  std::size_t frames() const { return baseline_psnr.size(); }
};

// Baseline is comp against raw; enhanced is enhanced against raw.
MetricReport DeltaReport(std::span<const Frame> raw, std::span<const Frame> comp, std::span<const Frame> enhanced);

// Delimited text: a header, one row per frame
// (index, baseline psnr, enhanced psnr, baseline ssim, enhanced ssim) and a
// `#`-prefixed aggregate footer.
void WriteReport(const std::filesystem::path& path, const MetricReport& report);
MetricReport ReadReport(const std::filesystem::path& path);

// Per-frame PSNR of baseline and enhanced frames as a standalone SVG document.
std::string RenderPsnrCurvesSvg(const MetricReport& report, const std::string& title);

}  // namespace vig

#endif  // VIG_METRICS_H_
