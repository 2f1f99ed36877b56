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

#ifndef VIG_MODEL_H_
#define VIG_MODEL_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vig/tensor.h"
#include "vig/tensor_ops.h"

namespace vig {

// Architecture hyperparameters of the recurrent enhancement network.
//
// The redundancy-filtering ladder stacks 1 + future_window pre-extracted
// frames with the hidden state (T = future_window + 2), then
//   tsd1: T -> T-1 frames, H/2, 2C channels
//   tsd2: T-1 -> T-2 frames, H/4, 4C channels
//   td:   T-2 -> 1 frame,  H/4, 4C channels
//   su1:  H/4 -> H/2, 2C channels (skip: time-mean of tsd2)
//   su2:  H/2 -> H,   C channels  (skip: time-mean of tsd1)
struct ModelConfig {
  static constexpr int kSpatialFactor = 2;
  static constexpr int kTsdBlocks = 2;

  int base_channels = 16;
  int future_window = 3;
  double leaky_slope = 0.1;
  // Start the fusion convolution at zero so a fresh model is the identity map.
  bool zero_fusion_init = true;

  int stack_length() const { return future_window + 2; }
  int td_frames() const { return future_window; }
  int channels_at(int level) const { return base_channels << level; }
  int size_multiple() const { return 4; }

  void Validate() const;
  bool operator==(const ModelConfig&) const = default;
};

template <typename T>
struct ParameterEntry {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

// Named learnable tensors with matching gradient slots, in a fixed order.
template <typename T>
class Parameters {
 public:
  void Add(std::string name, Shape shape);

  Tensor<T>& value(std::string_view name) { return entries_[IndexOf(name)].value; }
  const Tensor<T>& value(std::string_view name) const { return entries_[IndexOf(name)].value; }
  Tensor<T>& grad(std::string_view name) { return entries_[IndexOf(name)].grad; }
  const Tensor<T>& grad(std::string_view name) const { return entries_[IndexOf(name)].grad; }
  bool contains(std::string_view name) const { return index_.find(name) != index_.end(); }

  std::span<ParameterEntry<T>> entries() { return entries_; }
  std::span<const ParameterEntry<T>> entries() const { return entries_; }
  std::size_t count() const;  // total scalar count

  void ZeroGrad();

  template <typename U>
  Parameters<U> Cast() const {
    Parameters<U> out;
    for (const auto& e : entries_) {
      out.Add(e.name, e.value.shape());
      out.value(e.name) = e.value.template Cast<U>();
    }
    return out;
  }

 private:
  std::size_t IndexOf(std::string_view name) const;

  std::vector<ParameterEntry<T>> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Zero-valued parameters with the shapes implied by `config`.
template <typename T>
Parameters<T> MakeParameters(const ModelConfig& config);

// Fan-in scaled uniform initialization, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
template <typename T>
void InitializeParameters(Parameters<T>& params, std::uint64_t seed);

template <typename T>
Parameters<T> CreateModel(const ModelConfig& config, std::uint64_t seed) {
  Parameters<T> p = MakeParameters<T>(config);
  InitializeParameters(p, seed);
  if (config.zero_fusion_init) {
    p.value("fusion.weight").Fill(T(0));
    p.value("fusion.bias").Fill(T(0));
  }
  return p;
}

// ---- Block-level operations. Every forward takes an optional cache; the
// matching backward consumes it, accumulates parameter gradients and returns
// the gradient with respect to the block input.

template <typename T>
struct PreExtractCache {
  ConvCache<T> conv;
  Tensor<T> out;
};

template <typename T>
Tensor<T> PreExtract(const ModelConfig& cfg, const Parameters<T>& params, const Tensor<T>& frame,
                     PreExtractCache<T>* cache = nullptr);
template <typename T>
Tensor<T> PreExtractBackward(const ModelConfig& cfg, Parameters<T>& params, const PreExtractCache<T>& cache,
                             Tensor<T> grad);

template <typename T>
struct TsdCache {
  ConvCache<T> proj;
  ConvCache<T> conv;
  Tensor<T> out;
};

// block_index is 1 or 2.
template <typename T>
Tensor<T> TsdBlock(const ModelConfig& cfg, const Parameters<T>& params, const Tensor<T>& x, int block_index,
                   TsdCache<T>* cache = nullptr);
template <typename T>
Tensor<T> TsdBlockBackward(const ModelConfig& cfg, Parameters<T>& params, const TsdCache<T>& cache,
                           Tensor<T> grad, int block_index);

template <typename T>
struct TdCache {
  ConvCache<T> conv;
  Tensor<T> out;
};

template <typename T>
Tensor<T> TdBlock(const ModelConfig& cfg, const Parameters<T>& params, const Tensor<T>& x,
                  TdCache<T>* cache = nullptr);
template <typename T>
Tensor<T> TdBlockBackward(const ModelConfig& cfg, Parameters<T>& params, const TdCache<T>& cache, Tensor<T> grad);

template <typename T>
struct SuCache {
  ConvCache<T> conv;
  Tensor<T> out;
};

// block_index is 1 or 2. The returned gradient applies to both x and skip.
template <typename T>
Tensor<T> SuBlock(const ModelConfig& cfg, const Parameters<T>& params, const Tensor<T>& x, const Tensor<T>& skip,
                  int block_index, SuCache<T>* cache = nullptr);
template <typename T>
Tensor<T> SuBlockBackward(const ModelConfig& cfg, Parameters<T>& params, const SuCache<T>& cache, Tensor<T> grad,
                          int block_index);

template <typename T>
struct RfCache {
  TsdCache<T> tsd1, tsd2;
  TdCache<T> td;
  SuCache<T> su1, su2;
  int tsd1_frames = 0;
  int tsd2_frames = 0;
};

template <typename T>
struct RfGradients {
  std::vector<Tensor<T>> window;  // one per windowed feature map
  Tensor<T> hidden;
};

// Redundancy filtering: window holds 1 + future_window pre-extracted maps
// (current frame first); hidden is the previous step's output.
template <typename T>
Tensor<T> RfForward(const ModelConfig& cfg, const Parameters<T>& params, std::span<const Tensor<T>> window,
                    const Tensor<T>& hidden, RfCache<T>* cache = nullptr);
template <typename T>
RfGradients<T> RfBackward(const ModelConfig& cfg, Parameters<T>& params, const RfCache<T>& cache,
                          const Tensor<T>& grad);

template <typename T>
struct FusionCache {
  ConvCache<T> conv;
};

// Y = conv(F1) + frame. No clamping.
template <typename T>
Tensor<T> FuseResidual(const ModelConfig& cfg, const Parameters<T>& params, const Tensor<T>& f1,
                       const Tensor<T>& frame, FusionCache<T>* cache = nullptr);
// Returns the gradient with respect to f1; the frame gradient equals `grad`.
template <typename T>
Tensor<T> FuseResidualBackward(const ModelConfig& cfg, Parameters<T>& params, const FusionCache<T>& cache,
                               const Tensor<T>& grad);

// ---- Sequence recurrence.

template <typename T>
struct SequenceTape {
  std::vector<PreExtractCache<T>> pre;
  std::vector<RfCache<T>> rf;
  std::vector<FusionCache<T>> fusion;
};

// Index of the frame that fills window slot `offset` at step `step`, with the
// last frame replicated past the end of the sequence.
inline int WindowFrameIndex(int step, int offset, int frame_count) {
  const int idx = step + offset;
  return idx < frame_count ? idx : frame_count - 1;
}

// Enhances frames (each 1 x H x W) in order, threading the hidden state.
template <typename T>
std::vector<Tensor<T>> EnhanceSequence(const ModelConfig& cfg, const Parameters<T>& params,
                                       std::span<const Tensor<T>> frames, SequenceTape<T>* tape = nullptr);

// Backpropagates per-output gradients through the whole recurrence and
// returns per-input-frame gradients.
template <typename T>
std::vector<Tensor<T>> EnhanceSequenceBackward(const ModelConfig& cfg, Parameters<T>& params,
                                               const SequenceTape<T>& tape, std::span<const Tensor<T>> grads);

}  // namespace vig

#endif  // VIG_MODEL_H_
