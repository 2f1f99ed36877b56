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

#ifndef VIG_TRAIN_H_
#define VIG_TRAIN_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "vig/data.h"
#include "vig/model.h"
#include "vig/tgd.h"

namespace vig {

enum class Stage { kPretrain, kFinetune };

std::string_view StageName(Stage stage);
Stage ParseStage(std::string_view name);

struct TrainConfig {
  int batch_size = 32;  // clips per iteration
  int crop = 128;
  int clip_len = 13;
  long pretrain_iters = 20000;
  long finetune_iters = 100000;
  double lr_max = 3e-4;
  double lr_min = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double adam_eps = 1e-8;
  double charbonnier_eps = 1e-6;
  double grad_clip = 5.0;  // global L2 norm; <= 0 disables
  bool augment = true;
  std::uint64_t seed = 0;
  long checkpoint_every = 0;  // 0: only at the end of a stage
  long log_every = 1;

  void Validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// lr_min + (lr_max - lr_min) (1 + cos(pi t / total)) / 2 for 0 <= t <= total.
double CosineLr(long t, long total, double lr_max, double lr_min);

struct OptimizerState {
  std::vector<Tensor<float>> m, v;  // parameter order
  long step = 0;

  static OptimizerState For(const Parameters<float>& params);
  bool operator==(const OptimizerState&) const = default;
};

// Bias-corrected Adam on params.grad(); fails on non-finite gradients.
void AdamStep(Parameters<float>& params, OptimizerState& state, double lr, const TrainConfig& cfg);

// Scales gradients so their global L2 norm is at most max_norm; returns the
// norm before scaling.
double ClipGradNorm(Parameters<float>& params, double max_norm);

struct Checkpoint {
  ModelConfig model;
  TrainConfig train;
  Schedule schedule;
  Parameters<float> params;
  OptimizerState optimizer;
  Stage stage = Stage::kPretrain;
  long iteration = 0;  // completed iterations of `stage`
  bool tgd = true;     // false for a finetune that started from scratch
};

// Directory with `manifest.txt` (config, stage, iteration, seed and one line
// per tensor: role, name, shape, byte offset, count) and `tensors.bin`
// holding every tensor as little-endian float32 in manifest order.
void SaveCheckpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::filesystem::path& dir);

// ---- Batches.

struct TrainingSample {
  std::vector<Frame> input;   // composed (pretrain) or compressed (finetune)
  std::vector<Frame> target;  // raw
  std::vector<MaskGrid> masks;  // per frame; empty when finetuning
};

// Seeds every random choice of one iteration.
std::uint64_t BatchSeed(std::uint64_t seed, Stage stage, long iteration);

// Samples, crops and augments cfg.batch_size clips. With a mask spec each
// frame gets its own mask (seeded from the clip and frame index) and the
// input is the composition of raw and compressed frames.
std::vector<TrainingSample> MakeBatch(const Corpus& corpus, const TrainConfig& cfg, const MaskSpec* mask,
                                      std::uint64_t batch_seed);

// Mean over frames of the per-frame (masked) Charbonnier loss. When grads is
// set it receives d loss / d output per frame, scaled by `grad_scale`.
double SampleLoss(const std::vector<Frame>& outputs, const TrainingSample& sample, double eps,
                  std::vector<Frame>* grads = nullptr, double grad_scale = 1.0);

// ---- Logging.

struct LogRow {
  long iteration = 0;
  std::string stage;  // pretrain, finetune or finetune:no-TGD
  int patch_size = 0;  // 0 outside pretraining
  double lr = 0;
  double loss = 0;
  double wall_seconds = 0;
};

// Comma-separated rows: iteration,stage,w,lr,loss,wall_s.
class TrainingLog {
 public:
  explicit TrainingLog(const std::filesystem::path& path, bool append = false);
  void Append(const LogRow& row);

 private:
  std::ofstream out_;
};

std::string FormatLogRow(const LogRow& row);

// ---- Two-stage trainer.

class Trainer {
 public:
  // Fresh parameters from train.seed, positioned at pretraining iteration 0.
  Trainer(const ModelConfig& model, const TrainConfig& train, const Schedule& schedule);
  explicit Trainer(Checkpoint checkpoint);

  // Starts the finetuning stage with a fresh optimizer. `from_tgd` is false
  // for the cold-start ablation.
  void BeginFinetune(bool from_tgd);

  // One optimization step of the current stage; returns the batch loss.
  double Step(const Corpus& corpus);

  // Steps until `until` iterations of the current stage are complete.
  void Run(const Corpus& corpus, long until);

  long stage_length() const;
  double CurrentLr() const;
  int CurrentPatchSize() const;
  std::string StageTag() const;

  Stage stage() const { return ckpt_.stage; }
  long iteration() const { return ckpt_.iteration; }
  const Checkpoint& checkpoint() const { return ckpt_; }
  const Parameters<float>& params() const { return ckpt_.params; }
  double last_loss() const { return last_loss_; }

  std::function<void(const LogRow&)> on_log;
  std::function<void(const Checkpoint&)> on_checkpoint;

 private:
  Checkpoint ckpt_;
  SequenceTape<float> tape_;
  double last_loss_ = 0;
};

// Full pretraining stage from freshly initialized parameters.
Checkpoint Pretrain(const ModelConfig& model, const Corpus& corpus, const TrainConfig& cfg, const Schedule& schedule,
                    const std::function<void(const LogRow&)>& on_log = {});

// Finetuning from a pretraining checkpoint, or cold start when `init` is null.
Checkpoint Finetune(const ModelConfig& model, const Corpus& corpus, const TrainConfig& cfg, const Checkpoint* init,
                    const std::function<void(const LogRow&)>& on_log = {});

// Inference over a whole sequence with float parameters.
std::vector<Frame> EnhanceFrames(const ModelConfig& model, const Parameters<float>& params,
                                 const std::vector<Frame>& frames);

}  // namespace vig

#endif  // VIG_TRAIN_H_
