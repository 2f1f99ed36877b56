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

#ifndef VIG_COMMANDS_H_
#define VIG_COMMANDS_H_

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vig/config.h"
#include "vig/metrics.h"
#include "vig/train.h"

namespace vig {

// Exit status of the command-line tool for an error code:
// 2 configuration, 3 data, 4 runtime.
int ExitCodeFor(ErrorCode code);

// ---- prepare

struct PrepareOptions {
  std::filesystem::path manifest;  // source videos; ignored when synthesizing
  std::vector<double> q_levels{24, 32};
  std::filesystem::path out_dir;
  // When positive, generates this many synthetic raw videos instead of
  // reading a manifest.
  int synthesize = 0;
  int width = 128;
  int height = 128;
  int frames = 13;
  std::uint64_t seed = 0;
};

struct PrepareResult {
  std::filesystem::path manifest;  // out_dir/manifest.txt
  std::vector<ManifestEntry> entries;
  int written = 0;
  int skipped = 0;  // already present with the expected size
};

// Writes one degraded companion per (source, q) named <source>@q<q> and a
// manifest pairing each with its raw source.
PrepareResult CmdPrepare(const PrepareOptions& opts, std::ostream& log);

// ---- train

enum class StageRequest { kPretrain, kFinetune, kBoth };
StageRequest ParseStageRequest(const std::string& text);

struct TrainOptions {
  RunConfig config;
  StageRequest stage = StageRequest::kBoth;
  bool no_tgd = false;  // finetune from freshly initialized parameters
  std::optional<std::filesystem::path> init;  // pretrain checkpoint for --stage finetune
  bool resume = false;  // continue an interrupted stage from out_dir
};

struct TrainResult {
  std::vector<std::filesystem::path> checkpoints;  // completed stages, in order
};

// Layout under config.out_dir: config.txt, train_log.csv (with wall clock),
// loss_log.csv (deterministic columns only), pretrain/ and finetune/
// checkpoint directories.
TrainResult CmdTrain(const TrainOptions& opts, std::ostream& log);

// ---- enhance

struct EnhanceOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path input;
  std::filesystem::path output;
  int width = 0;
  int height = 0;
};

// Enhances the luma plane, passes chroma through and writes YUV420.
void CmdEnhance(const EnhanceOptions& opts, std::ostream& log);

// ---- evaluate

struct EvaluateOptions {
  std::filesystem::path raw, comp, enhanced;
  int width = 0;
  int height = 0;
  std::filesystem::path out_dir;
  std::string title = "Per-frame PSNR";
};

// Writes report.csv and psnr_curves.svg into out_dir.
MetricReport CmdEvaluate(const EvaluateOptions& opts, std::ostream& log);

// ---- sweep-mask

struct SweepCell {
  int patch_size = 0;
  double ratio = 0;
  double delta_psnr = 0;
};

struct SweepOptions {
  RunConfig config;
  std::vector<int> sizes{4, 8, 16, 32};
  std::vector<double> ratios{0.5, 0.7, 0.9};
};

// One pretrain + finetune run per (w, r) cell with a single-period schedule,
// all from the same seed. The last manifest video is held out for scoring.
// Writes sweep.csv into the output directory.
std::vector<SweepCell> CmdSweepMask(const SweepOptions& opts, std::ostream& log);

// Enhances a video's compressed frames, quantizes the result to 8 bits as
// the enhance command would, and scores both streams against raw.
MetricReport EvaluateVideo(const ModelConfig& model, const Parameters<float>& params, const Video& video);

// ---- analyze-variance

struct VarianceRow {
  std::string source;
  double raw = 0;
  std::vector<double> degraded;  // per column; NaN when the level is absent
};

struct VarianceTable {
  std::vector<std::string> columns;  // degraded level labels
  std::vector<VarianceRow> rows;     // per source, then a final "mean" row
};

// Mean 64x64 patch variance per source for raw and every degraded level.
// Videos smaller than one patch are skipped with a warning.
VarianceTable CmdAnalyzeVariance(const std::filesystem::path& manifest, std::ostream& log);
std::string FormatVarianceTable(const VarianceTable& table);

}  // namespace vig

#endif  // VIG_COMMANDS_H_
