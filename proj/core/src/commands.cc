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

#include "vig/commands.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace vig {

namespace fs = std::filesystem;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kRange:
      return 2;
    case ErrorCode::kIo:
    case ErrorCode::kParse:
    case ErrorCode::kShape:
    case ErrorCode::kEmpty:
      return 3;
    case ErrorCode::kNumeric:
      return 4;
  }
  return 4;
}

namespace {

std::string QLabel(double q) {
  std::ostringstream os;
  os << "q" << q;
  return os.str();
}

// Descriptor whose frame count comes from the file size.
VideoDescriptor Describe(const fs::path& path, int width, int height) {
  Require(fs::exists(path), ErrorCode::kIo, path.string() + ": no such file");
  VideoDescriptor d{path, width, height, 1, 8};
  d.Validate();
  const auto bytes = fs::file_size(path);
  Require(bytes > 0 && bytes % d.frame_bytes() == 0, ErrorCode::kIo,
          path.string() + ": size " + std::to_string(bytes) + " is not a whole number of " + std::to_string(width) +
              "x" + std::to_string(height) + " YUV420 frames (" + std::to_string(d.frame_bytes()) + " bytes each)");
  d.frame_count = static_cast<int>(bytes / d.frame_bytes());
  return d;
}

bool HasExpectedSize(const fs::path& path, std::size_t bytes) {
  std::error_code ec;
  return fs::is_regular_file(path, ec) && fs::file_size(path, ec) == bytes;
}

Frame Quantized(const Frame& f) {
  Frame out(f.shape());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = static_cast<float>(QuantizeSample(f[i])) / 255.0f;
  return out;
}

}  // namespace

// ---- prepare

PrepareResult CmdPrepare(const PrepareOptions& opts, std::ostream& log) {
  Require(!opts.out_dir.empty(), ErrorCode::kConfig, "prepare: --out is required");
  Require(!opts.q_levels.empty(), ErrorCode::kConfig, "prepare: at least one q level is required");
  for (double q : opts.q_levels) Require(q > 0, ErrorCode::kConfig, "prepare: q levels must be positive");
  fs::create_directories(opts.out_dir);
  PrepareResult result;

  std::vector<ManifestEntry> sources;
  if (opts.synthesize > 0) {
    Require(opts.width > 0 && opts.height > 0 && opts.frames > 0, ErrorCode::kConfig,
            "prepare: synthetic width, height and frames must be positive");
    for (int k = 0; k < opts.synthesize; ++k) {
      ManifestEntry e;
      e.name = "synth" + std::to_string(k);
      e.width = opts.width;
      e.height = opts.height;
      e.frames = opts.frames;
      e.raw_path = opts.out_dir / "raw" / (e.name + ".yuv");
      if (HasExpectedSize(e.raw_path, e.raw().expected_bytes())) {
        ++result.skipped;
      } else {
        std::vector<YuvFrame> frames;
        for (auto& y : SynthesizeVideo(e.width, e.height, e.frames, DeriveSeed(opts.seed, k))) {
          const Shape half{1, e.height / 2, e.width / 2};
          frames.push_back({std::move(y), Frame(half, 0.5f), Frame(half, 0.5f)});
        }
        WriteYuv420(e.raw_path, frames);
        ++result.written;
        log << "wrote " << e.raw_path.string() << "\n";
      }
      sources.push_back(std::move(e));
    }
  } else {
    Require(!opts.manifest.empty(), ErrorCode::kConfig, "prepare: a source manifest or --synthesize is required");
    sources = ReadManifest(opts.manifest);
    Require(!sources.empty(), ErrorCode::kEmpty, opts.manifest.string() + ": manifest lists no videos");
  }

  for (const auto& src : sources) {
    const std::string where = opts.synthesize > 0 ? src.name : opts.manifest.string() + ":" + std::to_string(src.line);
    const VideoDescriptor raw = src.raw();
    if (!fs::exists(raw.path)) Fail(ErrorCode::kIo, where + ": raw file " + raw.path.string() + " not found");
    std::optional<std::vector<YuvFrame>> frames;  // read lazily; skipped outputs need no decode
    for (double q : opts.q_levels) {
      ManifestEntry out = src;
      const std::string base = src.name.substr(0, src.name.find('@'));
      out.name = base + "@" + QLabel(q);
      out.comp_path = opts.out_dir / "comp" / (base + "_" + QLabel(q) + ".yuv");
      out.degrade_q.reset();
      if (HasExpectedSize(out.comp_path, raw.expected_bytes())) {
        ++result.skipped;
      } else {
        if (!frames) {
          try {
            frames = ReadYuv420(raw);
          } catch (const Error& e) {
            Fail(e.code(), where + ": " + e.what());
          }
        }
        DegraderConfig cfg;
        cfg.q = q;
        std::vector<YuvFrame> degraded;
        for (const auto& f : *frames) degraded.push_back({SynthDegrade(f.y, cfg), f.u, f.v});
        WriteYuv420(out.comp_path, degraded);
        ++result.written;
        log << "wrote " << out.comp_path.string() << "\n";
      }
      result.entries.push_back(std::move(out));
    }
  }
  result.manifest = opts.out_dir / "manifest.txt";
  WriteManifest(result.manifest, result.entries);
  log << "manifest " << result.manifest.string() << ": " << result.entries.size() << " pairs (" << result.written
      << " written, " << result.skipped << " already present)\n";
  return result;
}

// ---- train

StageRequest ParseStageRequest(const std::string& text) {
  if (text == "pretrain") return StageRequest::kPretrain;
  if (text == "finetune") return StageRequest::kFinetune;
  if (text == "both") return StageRequest::kBoth;
  Fail(ErrorCode::kConfig, "--stage must be pretrain, finetune or both, got '" + text + "'");
}

TrainResult CmdTrain(const TrainOptions& opts, std::ostream& log) {
  const RunConfig& cfg = opts.config;
  ValidateRunConfig(cfg);
  Require(!cfg.manifest.empty(), ErrorCode::kConfig, "data.manifest is not set (use --manifest)");
  const bool run_pretrain = opts.stage != StageRequest::kFinetune && !opts.no_tgd;
  const bool run_finetune = opts.stage != StageRequest::kPretrain;
  Require(!(opts.no_tgd && opts.stage == StageRequest::kPretrain), ErrorCode::kConfig,
          "--no-tgd skips pretraining and cannot be combined with --stage pretrain");

  const Corpus corpus = LoadCorpus(ReadManifest(cfg.manifest));
  Require(!corpus.empty(), ErrorCode::kEmpty, cfg.manifest.string() + ": manifest lists no videos");

  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  const Schedule schedule = cfg.schedule();
  {
    std::ofstream c(out / "config.txt", std::ios::trunc);
    c << "# preset " << cfg.preset << "\n" << FormatSettings(ToSettings(cfg.model, cfg.train, schedule));
  }
  TrainingLog train_log(out / "train_log.csv", opts.resume);
  const bool loss_fresh = !opts.resume || !fs::exists(out / "loss_log.csv");
  std::ofstream loss_log(out / "loss_log.csv", opts.resume ? std::ios::app : std::ios::trunc);
  if (loss_fresh) loss_log << "iteration,stage,w,lr,loss\n";
  auto on_log = [&](const LogRow& row) {
    train_log.Append(row);
    std::string line = FormatLogRow(row);
    loss_log << line.substr(0, line.rfind(',')) << "\n";
    loss_log.flush();
    log << row.stage << " " << row.iteration << " w=" << row.patch_size << " lr=" << row.lr << " loss=" << row.loss
        << "\n";
  };

  TrainResult result;
  const fs::path pre_dir = out / "pretrain", fine_dir = out / "finetune";
  std::optional<Checkpoint> pretrained;

  auto run = [&](Trainer& trainer, const fs::path& dir) {
    trainer.on_log = on_log;
    trainer.on_checkpoint = [&](const Checkpoint& c) { SaveCheckpoint(dir, c); };
    trainer.Run(corpus, trainer.stage_length());
    SaveCheckpoint(dir, trainer.checkpoint());
    result.checkpoints.push_back(dir);
    log << "saved " << dir.string() << "\n";
  };
  auto resumable = [&](const fs::path& dir, Stage stage) -> std::optional<Checkpoint> {
    if (!opts.resume || !fs::exists(dir / "manifest.txt")) return std::nullopt;
    Checkpoint c = LoadCheckpoint(dir);
    if (c.stage != stage) return std::nullopt;
    Require(c.model == cfg.model, ErrorCode::kConfig, dir.string() + ": checkpoint model differs from the configuration");
    c.train = cfg.train;
    return c;
  };

  if (run_pretrain) {
    std::optional<Checkpoint> resumed = resumable(pre_dir, Stage::kPretrain);
    std::optional<Trainer> trainer;
    if (resumed) {
      log << "resuming pretrain at iteration " << resumed->iteration << "\n";
      trainer.emplace(std::move(*resumed));
    } else {
      trainer.emplace(cfg.model, cfg.train, schedule);
    }
    run(*trainer, pre_dir);
    pretrained = trainer->checkpoint();
  }

  if (run_finetune) {
    std::optional<Trainer> trainer;
    if (std::optional<Checkpoint> resumed = resumable(fine_dir, Stage::kFinetune)) {
      log << "resuming finetune at iteration " << resumed->iteration << "\n";
      trainer.emplace(std::move(*resumed));
    } else if (opts.no_tgd) {
      trainer.emplace(cfg.model, cfg.train, schedule);
      trainer->BeginFinetune(false);
    } else {
      if (!pretrained) {
        const fs::path from = opts.init.value_or(pre_dir);
        pretrained = LoadCheckpoint(from);
        Require(pretrained->stage == Stage::kPretrain, ErrorCode::kConfig,
                from.string() + ": expected a pretrain checkpoint, found stage " +
                    std::string(StageName(pretrained->stage)));
        Require(pretrained->model == cfg.model, ErrorCode::kConfig,
                from.string() + ": checkpoint model differs from the configuration");
      }
      Checkpoint c = *pretrained;
      c.train = cfg.train;
      c.iteration = 0;
      trainer.emplace(std::move(c));
      trainer->BeginFinetune(true);
    }
    run(*trainer, fine_dir);
  }
  return result;
}

// ---- enhance

void CmdEnhance(const EnhanceOptions& opts, std::ostream& log) {
  Require(opts.width > 0 && opts.height > 0, ErrorCode::kConfig, "enhance: --width and --height are required");
  const VideoDescriptor in = Describe(opts.input, opts.width, opts.height);
  Require(opts.width % 4 == 0 && opts.height % 4 == 0, ErrorCode::kShape,
          opts.input.string() + ": resolution " + std::to_string(opts.width) + "x" + std::to_string(opts.height) +
              " is not divisible by 4; pad the video to " + std::to_string((opts.width + 3) / 4 * 4) + "x" +
              std::to_string((opts.height + 3) / 4 * 4) + " first");
  const Checkpoint ckpt = LoadCheckpoint(opts.checkpoint);
  std::vector<YuvFrame> frames = ReadYuv420(in);
  std::vector<Frame> luma;
  luma.reserve(frames.size());
  for (const auto& f : frames) luma.push_back(f.y);
  std::vector<Frame> enhanced = EnhanceFrames(ckpt.model, ckpt.params, luma);
  for (std::size_t t = 0; t < frames.size(); ++t) frames[t].y = std::move(enhanced[t]);
  WriteYuv420(opts.output, frames);
  log << "enhanced " << frames.size() << " frames -> " << opts.output.string() << "\n";
}

// ---- evaluate

MetricReport CmdEvaluate(const EvaluateOptions& opts, std::ostream& log) {
  Require(fs::exists(opts.enhanced), ErrorCode::kIo, opts.enhanced.string() + ": enhanced video not found");
  Require(opts.width > 0 && opts.height > 0, ErrorCode::kConfig, "evaluate: --width and --height are required");
  Require(!opts.out_dir.empty(), ErrorCode::kConfig, "evaluate: --out is required");
  const auto enh_d = Describe(opts.enhanced, opts.width, opts.height);
  const auto raw_d = Describe(opts.raw, opts.width, opts.height);
  const auto comp_d = Describe(opts.comp, opts.width, opts.height);
  Require(raw_d.frame_count == comp_d.frame_count && raw_d.frame_count == enh_d.frame_count, ErrorCode::kShape,
          "evaluate: frame counts differ (raw " + std::to_string(raw_d.frame_count) + ", comp " +
              std::to_string(comp_d.frame_count) + ", enhanced " + std::to_string(enh_d.frame_count) + ")");
  const auto raw = ReadLuma(raw_d), comp = ReadLuma(comp_d), enh = ReadLuma(enh_d);
  const MetricReport report = DeltaReport(raw, comp, enh);

  fs::create_directories(opts.out_dir);
  const fs::path report_path = opts.out_dir / "report.csv";
  WriteReport(report_path, report);
  // The plot is rendered from the report file, not the in-memory values.
  const std::string svg = RenderPsnrCurvesSvg(ReadReport(report_path), opts.title);
  std::ofstream(opts.out_dir / "psnr_curves.svg", std::ios::trunc) << svg;
  char line[128];
  std::snprintf(line, sizeof(line), "ΔPSNR (dB) / ΔSSIM (×10⁻²): %.2f / %.2f", report.delta_psnr,
                report.delta_ssim * 100.0);
  log << line << "\n";
  return report;
}

// ---- sweep-mask

MetricReport EvaluateVideo(const ModelConfig& model, const Parameters<float>& params, const Video& video) {
  std::vector<Frame> enhanced = EnhanceFrames(model, params, video.comp);
  for (auto& f : enhanced) f = Quantized(f);
  return DeltaReport(video.raw, video.comp, enhanced);
}

std::vector<SweepCell> CmdSweepMask(const SweepOptions& opts, std::ostream& log) {
  const RunConfig& cfg = opts.config;
  Require(!opts.sizes.empty() && !opts.ratios.empty(), ErrorCode::kConfig, "sweep-mask: empty size or ratio list");
  ValidateRunConfig(cfg);
  Require(cfg.train.pretrain_iters > 0, ErrorCode::kConfig, "sweep-mask: train.pretrain_iters must be positive");
  for (int w : opts.sizes) {
    for (double r : opts.ratios) {
      Require(r >= 0 && r < 1, ErrorCode::kConfig, "sweep-mask: ratio " + std::to_string(r) + " must lie in [0, 1)");
      Schedule{{{w, r, cfg.train.pretrain_iters}}}.Validate(cfg.train.crop);
    }
  }
  Require(!cfg.manifest.empty(), ErrorCode::kConfig, "data.manifest is not set (use --manifest)");
  Corpus corpus = LoadCorpus(ReadManifest(cfg.manifest));
  Require(corpus.size() >= 2, ErrorCode::kEmpty, "sweep-mask: need at least two videos (the last is held out)");
  const Video held_out = std::move(corpus.back());
  corpus.pop_back();

  std::vector<SweepCell> cells;
  for (int w : opts.sizes) {
    for (double r : opts.ratios) {
      const Schedule schedule{{{w, r, cfg.train.pretrain_iters}}};
      const Checkpoint pre = Pretrain(cfg.model, corpus, cfg.train, schedule);
      const Checkpoint fine = Finetune(cfg.model, corpus, cfg.train, &pre);
      const MetricReport rep = EvaluateVideo(cfg.model, fine.params, held_out);
      cells.push_back({w, r, rep.delta_psnr});
      log << "w=" << w << " r=" << r << " dPSNR=" << rep.delta_psnr << "\n";
    }
  }
  fs::create_directories(cfg.out_dir);
  std::ofstream csv(cfg.out_dir / "sweep.csv", std::ios::trunc);
  csv << "w,r,delta_psnr\n";
  for (const auto& c : cells) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d,%.6g,%.6f\n", c.patch_size, c.ratio, c.delta_psnr);
    csv << buf;
  }
  Require(csv.good(), ErrorCode::kIo, (cfg.out_dir / "sweep.csv").string() + ": write failed");
  return cells;
}

// ---- analyze-variance

VarianceTable CmdAnalyzeVariance(const fs::path& manifest, std::ostream& log) {
  const auto entries = ReadManifest(manifest);
  Require(!entries.empty(), ErrorCode::kEmpty, manifest.string() + ": manifest lists no videos");
  constexpr int kPatch = 64;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  VarianceTable table;
  std::map<std::string, std::size_t> row_of;  // keyed by raw path
  std::map<std::string, std::size_t> col_of;
  std::map<std::string, double> raw_done;
  for (const auto& e : entries) {
    const auto at = e.name.find('@');
    const std::string source = e.name.substr(0, at);
    const std::string label = at != std::string::npos ? e.name.substr(at + 1)
                              : e.degrade_q         ? QLabel(*e.degrade_q)
                                                    : e.comp_path.stem().string();
    if (e.width < kPatch || e.height < kPatch) {
      log << "warning: " << e.name << " is " << e.width << "x" << e.height << ", smaller than a " << kPatch << "x"
          << kPatch << " patch; skipped\n";
      continue;
    }
    if (!col_of.count(label)) {
      col_of[label] = table.columns.size();
      table.columns.push_back(label);
      for (auto& r : table.rows) r.degraded.push_back(nan);
    }
    const std::string key = e.raw_path.lexically_normal().string();
    if (!row_of.count(key)) {
      row_of[key] = table.rows.size();
      VarianceRow row{source, nan, std::vector<double>(table.columns.size(), nan)};
      const auto raw = ReadLuma(e.raw());
      row.raw = MeanPatchVariance(raw, kPatch);
      table.rows.push_back(std::move(row));
    }
    Video v = LoadVideo(e);
    table.rows[row_of[key]].degraded[col_of[label]] = MeanPatchVariance(v.comp, kPatch);
  }
  Require(!table.rows.empty(), ErrorCode::kEmpty, manifest.string() + ": no video is large enough to analyze");

  VarianceRow mean{"mean", 0, std::vector<double>(table.columns.size(), 0)};
  for (const auto& r : table.rows) mean.raw += r.raw / static_cast<double>(table.rows.size());
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    double sum = 0;
    int n = 0;
    for (const auto& r : table.rows) {
      if (!std::isnan(r.degraded[c])) {
        sum += r.degraded[c];
        ++n;
      }
    }
    mean.degraded[c] = n ? sum / n : nan;
  }
  table.rows.push_back(std::move(mean));
  return table;
}

std::string FormatVarianceTable(const VarianceTable& table) {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-16s %12s", "source", "raw");
  out += buf;
  for (const auto& c : table.columns) {
    std::snprintf(buf, sizeof(buf), " %12s", c.c_str());
    out += buf;
  }
  out += "\n";
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof(buf), "%-16s %12.2f", r.source.c_str(), r.raw);
    out += buf;
    for (double d : r.degraded) {
      if (std::isnan(d)) std::snprintf(buf, sizeof(buf), " %12s", "-");
      else std::snprintf(buf, sizeof(buf), " %12.2f", d);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace vig
