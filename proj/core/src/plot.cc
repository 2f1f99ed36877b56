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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "vig/metrics.h"

namespace vig {

namespace {

constexpr double kWidth = 720, kHeight = 400;
constexpr double kLeft = 64, kRight = 24, kTop = 40, kBottom = 52;

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string RenderPsnrCurvesSvg(const MetricReport& report, const std::string& title) {
  Require(report.frames() > 0, ErrorCode::kEmpty, "RenderPsnrCurvesSvg: empty report");
  const std::size_t n = report.frames();
  double lo = std::min(*std::min_element(report.baseline_psnr.begin(), report.baseline_psnr.end()),
                       *std::min_element(report.enhanced_psnr.begin(), report.enhanced_psnr.end()));
  double hi = std::max(*std::max_element(report.baseline_psnr.begin(), report.baseline_psnr.end()),
                       *std::max_element(report.enhanced_psnr.begin(), report.enhanced_psnr.end()));
  lo = std::floor(lo - 0.5);
  hi = std::ceil(hi + 0.5);

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](std::size_t i) { return kLeft + (n > 1 ? pw * static_cast<double>(i) / (n - 1) : pw / 2); };
  auto sy = [&](double v) { return kTop + ph * (hi - v) / (hi - lo); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << Escape(title)
      << "</text>\n";

  // Axes and grid.
  svg << "<g stroke=\"#999\" stroke-width=\"1\">\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\"" << kTop + ph
      << "\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph << "\"/>\n";
  svg << "</g>\n<g fill=\"#333\">\n";
  const int yticks = 5;
  for (int t = 0; t <= yticks; ++t) {
    const double v = lo + (hi - lo) * t / yticks;
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << Num(sy(v)) << "\" x2=\"" << kLeft + pw << "\" y2=\""
        << Num(sy(v)) << "\" stroke=\"#eee\"/>\n";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << Num(sy(v) + 4) << "\" text-anchor=\"end\">" << Num(v)
        << "</text>\n";
  }
  const std::size_t xstep = std::max<std::size_t>(1, n / 10);
  for (std::size_t i = 0; i < n; i += xstep)
    svg << "<text x=\"" << Num(sx(i)) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">" << i
        << "</text>\n";
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">Frame</text>\n";
  svg << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kTop + ph / 2 << ")\">PSNR (dB)</text>\n</g>\n";

  auto polyline = [&](const std::vector<double>& ys, const char* color, const char* id) {
    svg << "<polyline id=\"" << id << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < n; ++i) svg << (i ? " " : "") << Num(sx(i)) << ',' << Num(sy(ys[i]));
    svg << "\"/>\n";
  };
  polyline(report.baseline_psnr, "#1f77b4", "baseline");
  polyline(report.enhanced_psnr, "#d62728", "enhanced");

  const double lx = kLeft + pw - 170, ly = kTop + 8;
  svg << "<g font-size=\"11\">\n";
  svg << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly
      << "\" stroke=\"#1f77b4\" stroke-width=\"2\"/><text x=\"" << lx + 30 << "\" y=\"" << ly + 4
      << "\">Compressed (mean " << Num(report.mean_baseline_psnr) << ")</text>\n";
  svg << "<line x1=\"" << lx << "\" y1=\"" << ly + 16 << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly + 16
      << "\" stroke=\"#d62728\" stroke-width=\"2\"/><text x=\"" << lx + 30 << "\" y=\"" << ly + 20
      << "\">Enhanced (mean " << Num(report.mean_enhanced_psnr) << ")</text>\n";
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace vig
