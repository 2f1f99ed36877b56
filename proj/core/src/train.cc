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

#include "vig/train.h"

#include <chrono>
#include <cstdio>
#include <cmath>
#include <numbers>
#include <optional>

namespace vig {

std::string_view StageName(Stage stage) { return stage == Stage::kPretrain ? "pretrain" : "finetune"; }

Stage ParseStage(std::string_view name) {
  if (name == "pretrain") return Stage::kPretrain;
  if (name == "finetune") return Stage::kFinetune;
  Fail(ErrorCode::kConfig, "unknown stage '" + std::string(name) + "'");
}

void TrainConfig::Validate() const {
  auto check = [](bool ok, const std::string& msg) { Require(ok, ErrorCode::kConfig, msg); };
  check(batch_size >= 1, "train.batch_size must be at least 1");
  check(crop >= 4 && crop % 4 == 0, "train.crop must be a positive multiple of 4");
  check(clip_len >= 1, "train.clip_len must be at least 1");
  check(pretrain_iters >= 0, "train.pretrain_iters must be non-negative");
  check(finetune_iters >= 0, "train.finetune_iters must be non-negative");
  check(lr_min > 0 && lr_max >= lr_min, "train.lr_max must be >= train.lr_min > 0");
  check(beta1 >= 0 && beta1 < 1, "train.beta1 must lie in [0, 1)");
  check(beta2 >= 0 && beta2 < 1, "train.beta2 must lie in [0, 1)");
  check(adam_eps > 0, "train.adam_eps must be positive");
  check(charbonnier_eps > 0, "train.charbonnier_eps must be positive");
  check(std::isfinite(grad_clip), "train.grad_clip must be finite");
  check(checkpoint_every >= 0, "train.checkpoint_every must be non-negative");
  check(log_every >= 1, "train.log_every must be at least 1");
}

double CosineLr(long t, long total, double lr_max, double lr_min) {
  Require(total > 0 && t >= 0 && t <= total, ErrorCode::kRange,
          "CosineLr: step " + std::to_string(t) + " outside [0, " + std::to_string(total) + "]");
  // Weighted form keeps both endpoints exact.
  const double w = 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(t) / static_cast<double>(total)));
  return lr_max * w + lr_min * (1.0 - w);
}

OptimizerState OptimizerState::For(const Parameters<float>& params) {
  OptimizerState s;
  for (const auto& e : params.entries()) {
    s.m.emplace_back(e.value.shape());
    s.v.emplace_back(e.value.shape());
  }
  return s;
}

void AdamStep(Parameters<float>& params, OptimizerState& state, double lr, const TrainConfig& cfg) {
  auto entries = params.entries();
  Require(state.m.size() == entries.size() && state.v.size() == entries.size(), ErrorCode::kShape,
          "AdamStep: optimizer state does not match parameters");
  for (const auto& e : entries) {
    for (float g : e.grad.span())
      Require(std::isfinite(g), ErrorCode::kNumeric, "non-finite gradient in " + e.name);
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    float* w = entries[i].value.data();
    const float* g = entries[i].grad.data();
    float* m = state.m[i].data();
    float* v = state.v[i].data();
    RequireSameShape(state.m[i].shape(), entries[i].value.shape(), "AdamStep " + entries[i].name);
    for (std::size_t k = 0; k < entries[i].value.size(); ++k) {
      const double gk = g[k];
      const double mk = b1 * m[k] + (1.0 - b1) * gk;
      const double vk = b2 * v[k] + (1.0 - b2) * gk * gk;
      m[k] = static_cast<float>(mk);
      v[k] = static_cast<float>(vk);
      w[k] = static_cast<float>(w[k] - lr * (mk / c1) / (std::sqrt(vk / c2) + cfg.adam_eps));
    }
  }
}

double ClipGradNorm(Parameters<float>& params, double max_norm) {
  double sq = 0;
  for (const auto& e : params.entries())
    for (float g : e.grad.span()) sq += static_cast<double>(g) * g;
  const double norm = std::sqrt(sq);
  Require(std::isfinite(norm), ErrorCode::kNumeric, "non-finite gradient norm");
  if (max_norm > 0 && norm > max_norm) {
    const float scale = static_cast<float>(max_norm / norm);
    for (auto& e : params.entries())
      for (float& g : e.grad.span()) g *= scale;
  }
  return norm;
}

std::uint64_t BatchSeed(std::uint64_t seed, Stage stage, long iteration) {
  return DeriveSeed(DeriveSeed(seed, stage == Stage::kPretrain ? 0x7072 : 0x6674), static_cast<std::uint64_t>(iteration));
}

std::vector<TrainingSample> MakeBatch(const Corpus& corpus, const TrainConfig& cfg, const MaskSpec* mask,
                                      std::uint64_t batch_seed) {
  std::vector<TrainingSample> batch(cfg.batch_size);
  for (int b = 0; b < cfg.batch_size; ++b) {
    const std::uint64_t clip_seed = DeriveSeed(batch_seed, static_cast<std::uint64_t>(b));
    PairedClip clip = SampleClip(corpus, cfg.clip_len, DeriveSeed(clip_seed, 1));
    clip = CropPair(clip, cfg.crop, DeriveSeed(clip_seed, 2));
    if (cfg.augment) clip = AugmentPair(clip, DeriveSeed(clip_seed, 3));
    TrainingSample& s = batch[b];
    if (mask) {
      const std::uint64_t mask_seed = DeriveSeed(clip_seed, 4);
      for (std::size_t j = 0; j < clip.raw.size(); ++j) {
        MaskSpec spec = *mask;
        spec.seed = DeriveSeed(mask_seed, j);
        s.masks.push_back(BuildMask(spec, cfg.crop, cfg.crop));
        s.input.push_back(Compose(clip.raw[j], clip.comp[j], s.masks.back()));
      }
    } else {
      s.input = std::move(clip.comp);
    }
    s.target = std::move(clip.raw);
  }
  return batch;
}

double SampleLoss(const std::vector<Frame>& outputs, const TrainingSample& sample, double eps,
                  std::vector<Frame>* grads, double grad_scale) {
  const std::size_t n = outputs.size();
  Require(n > 0 && n == sample.target.size(), ErrorCode::kShape, "SampleLoss: output/target count mismatch");
  Require(sample.masks.empty() || sample.masks.size() == n, ErrorCode::kShape, "SampleLoss: mask count mismatch");
  if (grads) grads->assign(n, Frame());
  double total = 0;
  for (std::size_t j = 0; j < n; ++j) {
    Frame* g = grads ? &(*grads)[j] : nullptr;
    total += sample.masks.empty() ? Charbonnier(outputs[j], sample.target[j], eps, g)
                                  : MaskedCharbonnier(outputs[j], sample.target[j], sample.masks[j], eps, g);
    if (g) {
      const float s = static_cast<float>(grad_scale / static_cast<double>(n));
      for (float& v : g->span()) v *= s;
    }
  }
  return total / static_cast<double>(n);
}

std::string FormatLogRow(const LogRow& row) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%ld,%s,%d,%.9g,%.9g,%.3f", row.iteration, row.stage.c_str(), row.patch_size, row.lr,
                row.loss, row.wall_seconds);
  return buf;
}

TrainingLog::TrainingLog(const std::filesystem::path& path, bool append) {
  const bool fresh = !append || !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  out_.open(path, append ? std::ios::app : std::ios::trunc);
  Require(static_cast<bool>(out_), ErrorCode::kIo, path.string() + ": cannot open training log");
  if (fresh) out_ << "iteration,stage,w,lr,loss,wall_s\n";
}

void TrainingLog::Append(const LogRow& row) {
  out_ << FormatLogRow(row) << '\n';
  out_.flush();
}

namespace {

void ValidatePretraining(const TrainConfig& train, const Schedule& schedule) {
  if (train.pretrain_iters == 0) return;
  schedule.Validate(train.crop);
  Require(schedule.total_iterations() == train.pretrain_iters, ErrorCode::kConfig,
          "tgd.periods total " + std::to_string(schedule.total_iterations()) + " differs from train.pretrain_iters " +
              std::to_string(train.pretrain_iters));
}

double WallSeconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

}  // namespace

Trainer::Trainer(const ModelConfig& model, const TrainConfig& train, const Schedule& schedule) {
  model.Validate();
  train.Validate();
  ckpt_.model = model;
  ckpt_.train = train;
  ckpt_.schedule = schedule;
  ckpt_.params = CreateModel<float>(model, DeriveSeed(train.seed, 0x1417));
  ckpt_.optimizer = OptimizerState::For(ckpt_.params);
}

Trainer::Trainer(Checkpoint checkpoint) : ckpt_(std::move(checkpoint)) {
  ckpt_.model.Validate();
  ckpt_.train.Validate();
  Require(ckpt_.iteration >= 0 && ckpt_.iteration <= stage_length(), ErrorCode::kRange,
          "checkpoint iteration " + std::to_string(ckpt_.iteration) + " outside its stage");
}

void Trainer::BeginFinetune(bool from_tgd) {
  ckpt_.stage = Stage::kFinetune;
  ckpt_.iteration = 0;
  ckpt_.tgd = from_tgd;
  ckpt_.optimizer = OptimizerState::For(ckpt_.params);
}

long Trainer::stage_length() const {
  return ckpt_.stage == Stage::kPretrain ? ckpt_.train.pretrain_iters : ckpt_.train.finetune_iters;
}

double Trainer::CurrentLr() const {
  const auto& t = ckpt_.train;
  if (ckpt_.stage == Stage::kFinetune) return CosineLr(ckpt_.iteration, t.finetune_iters, t.lr_max, t.lr_min);
  // Each pretraining period restarts the cosine.
  const int p = ckpt_.schedule.PeriodIndex(ckpt_.iteration);
  const long start = ckpt_.schedule.PeriodStart(p);
  return CosineLr(ckpt_.iteration - start, ckpt_.schedule.periods[p].iterations, t.lr_max, t.lr_min);
}

int Trainer::CurrentPatchSize() const {
  if (ckpt_.stage != Stage::kPretrain) return 0;
  return ScheduleLookup(ckpt_.schedule, ckpt_.iteration).patch_size;
}

std::string Trainer::StageTag() const {
  if (ckpt_.stage == Stage::kPretrain) return "pretrain";
  return ckpt_.tgd ? "finetune" : "finetune:no-TGD";
}

double Trainer::Step(const Corpus& corpus) {
  Require(ckpt_.iteration < stage_length(), ErrorCode::kRange,
          std::string(StageName(ckpt_.stage)) + " stage already complete");
  const TrainConfig& cfg = ckpt_.train;
  const bool pretrain = ckpt_.stage == Stage::kPretrain;
  if (pretrain && ckpt_.iteration == 0) ValidatePretraining(cfg, ckpt_.schedule);

  MaskSpec spec;
  if (pretrain) spec = ScheduleLookup(ckpt_.schedule, ckpt_.iteration);
  const double lr = CurrentLr();
  const auto batch = MakeBatch(corpus, cfg, pretrain ? &spec : nullptr, BatchSeed(cfg.seed, ckpt_.stage, ckpt_.iteration));

  ckpt_.params.ZeroGrad();
  double loss = 0;
  std::vector<Frame> grads;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto& sample : batch) {
    const auto outputs = EnhanceSequence<float>(ckpt_.model, ckpt_.params, sample.input, &tape_);
    loss += SampleLoss(outputs, sample, cfg.charbonnier_eps, &grads, scale);
    EnhanceSequenceBackward<float>(ckpt_.model, ckpt_.params, tape_, grads);
  }
  loss *= scale;
  Require(std::isfinite(loss), ErrorCode::kNumeric,
          "non-finite loss at " + std::string(StageName(ckpt_.stage)) + " iteration " + std::to_string(ckpt_.iteration));
  ClipGradNorm(ckpt_.params, cfg.grad_clip);
  AdamStep(ckpt_.params, ckpt_.optimizer, lr, cfg);

  const long done = ++ckpt_.iteration;
  last_loss_ = loss;
  if (on_log && (done % cfg.log_every == 0 || done == stage_length())) {
    on_log(LogRow{done - 1, StageTag(), pretrain ? spec.patch_size : 0, lr, loss, WallSeconds()});
  }
  if (on_checkpoint && cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 && done != stage_length()) {
    on_checkpoint(ckpt_);
  }
  return loss;
}

void Trainer::Run(const Corpus& corpus, long until) {
  Require(until <= stage_length(), ErrorCode::kRange, "Run: target beyond the stage length");
  if (ckpt_.stage == Stage::kPretrain) ValidatePretraining(ckpt_.train, ckpt_.schedule);
  while (ckpt_.iteration < until) Step(corpus);
}

Checkpoint Pretrain(const ModelConfig& model, const Corpus& corpus, const TrainConfig& cfg, const Schedule& schedule,
                    const std::function<void(const LogRow&)>& on_log) {
  ValidatePretraining(cfg, schedule);
  Trainer trainer(model, cfg, schedule);
  trainer.on_log = on_log;
  trainer.Run(corpus, cfg.pretrain_iters);
  return trainer.checkpoint();
}

Checkpoint Finetune(const ModelConfig& model, const Corpus& corpus, const TrainConfig& cfg, const Checkpoint* init,
                    const std::function<void(const LogRow&)>& on_log) {
  std::optional<Trainer> trainer;
  if (init) {
    Require(init->model == model, ErrorCode::kConfig, "Finetune: checkpoint model differs from the requested model");
    Checkpoint c = *init;
    c.train = cfg;
    c.stage = Stage::kPretrain;
    c.iteration = 0;
    trainer.emplace(std::move(c));
    trainer->BeginFinetune(true);
  } else {
    trainer.emplace(model, cfg, Schedule{});
    trainer->BeginFinetune(false);
  }
  trainer->on_log = on_log;
  trainer->Run(corpus, cfg.finetune_iters);
  return trainer->checkpoint();
}

std::vector<Frame> EnhanceFrames(const ModelConfig& model, const Parameters<float>& params,
                                 const std::vector<Frame>& frames) {
  return EnhanceSequence<float>(model, params, frames);
}

}  // namespace vig
