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

#include "vig/model.h"

#include <cmath>
#include <random>

namespace vig {

void ModelConfig::Validate() const {
  Require(base_channels >= 1, ErrorCode::kConfig, "model.base_channels must be >= 1");
  // Two TSD blocks each consume one frame, so the stack needs at least three.
  Require(future_window >= 1, ErrorCode::kConfig, "model.future_window must be >= 1");
  Require(leaky_slope > 0.0 && leaky_slope < 1.0, ErrorCode::kConfig, "model.leaky_slope must lie in (0, 1)");
}

template <typename T>
void Parameters<T>::Add(std::string name, Shape shape) {
  Require(!contains(name), ErrorCode::kConfig, "duplicate parameter " + name);
  index_.emplace(name, entries_.size());
  Tensor<T> value(shape);
  Tensor<T> grad(std::move(shape));
  entries_.push_back({std::move(name), std::move(value), std::move(grad)});
}

template <typename T>
std::size_t Parameters<T>::IndexOf(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) Fail(ErrorCode::kConfig, "unknown parameter " + std::string(name));
  return it->second;
}

template <typename T>
std::size_t Parameters<T>::count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

template <typename T>
void Parameters<T>::ZeroGrad() {
  for (auto& e : entries_) e.grad.Fill(T(0));
}

namespace {

ConvGeometry PreGeometry(const ModelConfig& c) { return {1, c.base_channels, 1, 3}; }
ConvGeometry TsdProjGeometry(const ModelConfig& c, int b) {
  return {4 * c.channels_at(b - 1), c.channels_at(b), 1, 1};
}
ConvGeometry TsdConvGeometry(const ModelConfig& c, int b) { return {c.channels_at(b), c.channels_at(b), 2, 3}; }
ConvGeometry TdGeometry(const ModelConfig& c) { return {c.channels_at(2), c.channels_at(2), c.td_frames(), 3}; }
ConvGeometry SuGeometry(const ModelConfig& c, int b) {
  const int in = c.channels_at(3 - b);
  return {in, 2 * in, 1, 3};
}
ConvGeometry FusionGeometry(const ModelConfig& c) { return {c.base_channels, 1, 1, 3}; }

std::string Tsd(int b, const char* leaf) { return "tsd" + std::to_string(b) + "." + leaf; }
std::string Su(int b, const char* leaf) { return "su" + std::to_string(b) + "." + leaf; }

void RequireBlockIndex(int b) {
  Require(b == 1 || b == 2, ErrorCode::kRange, "block index must be 1 or 2, got " + std::to_string(b));
}

template <typename T>
void AddConv(Parameters<T>& p, const std::string& prefix, const ConvGeometry& g) {
  p.Add(prefix + ".weight", g.weight_shape());
  p.Add(prefix + ".bias", g.bias_shape());
}

template <typename T>
Tensor<T> Conv(const Parameters<T>& p, const std::string& prefix, const ConvGeometry& g, const Tensor<T>& x,
               ConvCache<T>* cache) {
  return ConvForward(g, x, p.value(prefix + ".weight"), p.value(prefix + ".bias"), cache);
}

template <typename T>
Tensor<T> ConvBack(Parameters<T>& p, const std::string& prefix, const ConvCache<T>& cache, const Tensor<T>& g) {
  const std::string w = prefix + ".weight", b = prefix + ".bias";
  return ConvBackward(cache, p.value(w), g, p.grad(w), p.grad(b));
}

template <typename T>
T Slope(const ModelConfig& c) {
  return static_cast<T>(c.leaky_slope);
}

}  // namespace

template <typename T>
Parameters<T> MakeParameters(const ModelConfig& cfg) {
  cfg.Validate();
  Parameters<T> p;
  AddConv(p, "pre", PreGeometry(cfg));
  for (int b = 1; b <= ModelConfig::kTsdBlocks; ++b) {
    AddConv(p, Tsd(b, "proj"), TsdProjGeometry(cfg, b));
    AddConv(p, Tsd(b, "conv"), TsdConvGeometry(cfg, b));
  }
  AddConv(p, "td.conv", TdGeometry(cfg));
  for (int b = 1; b <= ModelConfig::kTsdBlocks; ++b) AddConv(p, Su(b, "conv"), SuGeometry(cfg, b));
  AddConv(p, "fusion", FusionGeometry(cfg));
  return p;
}

template <typename T>
void InitializeParameters(Parameters<T>& params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& e : params.entries()) {
    // Bias entries follow their weight and reuse its fan-in.
    const std::string& name = e.name;
    const std::string stem = name.substr(0, name.rfind('.'));
    const Shape& ws = params.value(stem + ".weight").shape();
    int fan_in = 1;
    for (std::size_t i = 1; i < ws.size(); ++i) fan_in *= ws[i];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (T& v : e.value.vec()) v = static_cast<T>(dist(rng));
    e.grad.Fill(T(0));
  }
}

template <typename T>
Tensor<T> PreExtract(const ModelConfig& cfg, const Parameters<T>& params, const Tensor<T>& frame,
                     PreExtractCache<T>* cache) {
  Require(frame.rank() == 3 && frame.dim(0) == 1, ErrorCode::kShape,
          "PreExtract: expected a 1xHxW frame, got " + ShapeString(frame.shape()));
  Require(frame.dim(1) % cfg.size_multiple() == 0 && frame.dim(2) % cfg.size_multiple() == 0, ErrorCode::kShape,
          "PreExtract: frame " + ShapeString(frame.shape()) + " is not divisible by " +
              std::to_string(cfg.size_multiple()));
  Tensor<T> y = Conv(params, "pre", PreGeometry(cfg), frame, cache ? &cache->conv : nullptr);
  LeakyReluInPlace(y, Slope<T>(cfg));
  if (cache) cache->out = y;
  return y;
}

template <typename T>
Tensor<T> PreExtractBackward(const ModelConfig& cfg, Parameters<T>& params, const PreExtractCache<T>& cache,
                             Tensor<T> grad) {
  LeakyReluBackwardInPlace(cache.out, grad, Slope<T>(cfg));
  return ConvBack(params, "pre", cache.conv, grad);
}

template <typename T>
Tensor<T> TsdBlock(const ModelConfig& cfg, const Parameters<T>& params, const Tensor<T>& x, int b,
                   TsdCache<T>* cache) {
  RequireBlockIndex(b);
  Require(x.rank() == 4, ErrorCode::kShape, "TsdBlock: expected TxCxHxW input, got " + ShapeString(x.shape()));
  Require(x.dim(0) >= 2, ErrorCode::kShape,
          "TsdBlock: need at least 2 frames, got " + std::to_string(x.dim(0)));
  Tensor<T> u = PixelUnshuffle(x, ModelConfig::kSpatialFactor);
  Tensor<T> p = Conv(params, Tsd(b, "proj"), TsdProjGeometry(cfg, b), u, cache ? &cache->proj : nullptr);
  Tensor<T> y = Conv(params, Tsd(b, "conv"), TsdConvGeometry(cfg, b), p, cache ? &cache->conv : nullptr);
  LeakyReluInPlace(y, Slope<T>(cfg));
  if (cache) cache->out = y;
  return y;
}

template <typename T>
Tensor<T> TsdBlockBackward(const ModelConfig& cfg, Parameters<T>& params, const TsdCache<T>& cache,
                           Tensor<T> grad, int b) {
  RequireBlockIndex(b);
  LeakyReluBackwardInPlace(cache.out, grad, Slope<T>(cfg));
  Tensor<T> gp = ConvBack(params, Tsd(b, "conv"), cache.conv, grad);
  Tensor<T> gu = ConvBack(params, Tsd(b, "proj"), cache.proj, gp);
  return PixelShuffle(gu, ModelConfig::kSpatialFactor);
}

template <typename T>
Tensor<T> TdBlock(const ModelConfig& cfg, const Parameters<T>& params, const Tensor<T>& x, TdCache<T>* cache) {
  Require(x.rank() == 4 && x.dim(0) == cfg.td_frames(), ErrorCode::kShape,
          "TdBlock: expected " + std::to_string(cfg.td_frames()) + " frames, got " + ShapeString(x.shape()));
  Tensor<T> y = Conv(params, "td.conv", TdGeometry(cfg), x, cache ? &cache->conv : nullptr);
  y = y.Reshaped({y.dim(1), y.dim(2), y.dim(3)});
  LeakyReluInPlace(y, Slope<T>(cfg));
  if (cache) cache->out = y;
  return y;
}

template <typename T>
Tensor<T> TdBlockBackward(const ModelConfig& cfg, Parameters<T>& params, const TdCache<T>& cache, Tensor<T> grad) {
  LeakyReluBackwardInPlace(cache.out, grad, Slope<T>(cfg));
  return ConvBack(params, "td.conv", cache.conv, grad.Reshaped({1, grad.dim(0), grad.dim(1), grad.dim(2)}));
}

template <typename T>
Tensor<T> SuBlock(const ModelConfig& cfg, const Parameters<T>& params, const Tensor<T>& x, const Tensor<T>& skip,
                  int b, SuCache<T>* cache) {
  RequireBlockIndex(b);
  RequireSameShape(x.shape(), skip.shape(), "SuBlock skip");
  Tensor<T> s = x;
  AddInPlace(s, skip);
  Tensor<T> c = Conv(params, Su(b, "conv"), SuGeometry(cfg, b), s, cache ? &cache->conv : nullptr);
  Tensor<T> y = PixelShuffle(c, ModelConfig::kSpatialFactor);
  LeakyReluInPlace(y, Slope<T>(cfg));
  if (cache) cache->out = y;
  return y;
}

template <typename T>
Tensor<T> SuBlockBackward(const ModelConfig& cfg, Parameters<T>& params, const SuCache<T>& cache, Tensor<T> grad,
                          int b) {
  RequireBlockIndex(b);
  LeakyReluBackwardInPlace(cache.out, grad, Slope<T>(cfg));
  return ConvBack(params, Su(b, "conv"), cache.conv, PixelUnshuffle(grad, ModelConfig::kSpatialFactor));
}

namespace {

template <typename T>
Tensor<T> RfForwardImpl(const ModelConfig& cfg, const Parameters<T>& params,
                        std::span<const Tensor<T>* const> window, const Tensor<T>& hidden, RfCache<T>* cache) {
  Require(static_cast<int>(window.size()) == cfg.future_window + 1, ErrorCode::kShape,
          "RfForward: window must hold " + std::to_string(cfg.future_window + 1) + " feature maps, got " +
              std::to_string(window.size()));
  std::vector<const Tensor<T>*> stack(window.begin(), window.end());
  stack.push_back(&hidden);
  const Tensor<T> x = Stack<T>(stack);

  Tensor<T> a = TsdBlock(cfg, params, x, 1, cache ? &cache->tsd1 : nullptr);
  Tensor<T> b = TsdBlock(cfg, params, a, 2, cache ? &cache->tsd2 : nullptr);
  Tensor<T> d = TdBlock(cfg, params, b, cache ? &cache->td : nullptr);
  Tensor<T> u1 = SuBlock(cfg, params, d, TemporalMean(b), 1, cache ? &cache->su1 : nullptr);
  Tensor<T> f1 = SuBlock(cfg, params, u1, TemporalMean(a), 2, cache ? &cache->su2 : nullptr);
  if (cache) {
    cache->tsd1_frames = a.dim(0);
    cache->tsd2_frames = b.dim(0);
  }
  return f1;
}

}  // namespace

template <typename T>
Tensor<T> RfForward(const ModelConfig& cfg, const Parameters<T>& params, std::span<const Tensor<T>> window,
                    const Tensor<T>& hidden, RfCache<T>* cache) {
  std::vector<const Tensor<T>*> ptrs;
  for (const auto& w : window) ptrs.push_back(&w);
  return RfForwardImpl<T>(cfg, params, ptrs, hidden, cache);
}

template <typename T>
RfGradients<T> RfBackward(const ModelConfig& cfg, Parameters<T>& params, const RfCache<T>& cache,
                          const Tensor<T>& grad) {
  Tensor<T> g_sum2 = SuBlockBackward(cfg, params, cache.su2, grad, 2);
  Tensor<T> g_a = TemporalMeanBackward(g_sum2, cache.tsd1_frames);
  Tensor<T> g_sum1 = SuBlockBackward(cfg, params, cache.su1, g_sum2, 1);
  Tensor<T> g_b = TemporalMeanBackward(g_sum1, cache.tsd2_frames);
  AddInPlace(g_b, TdBlockBackward(cfg, params, cache.td, g_sum1));
  AddInPlace(g_a, TsdBlockBackward(cfg, params, cache.tsd2, std::move(g_b), 2));
  Tensor<T> g_x = TsdBlockBackward(cfg, params, cache.tsd1, std::move(g_a), 1);

  RfGradients<T> out;
  const int frames = g_x.dim(0);
  for (int t = 0; t + 1 < frames; ++t) out.window.push_back(Slice(g_x, t));
  out.hidden = Slice(g_x, frames - 1);
  return out;
}

template <typename T>
Tensor<T> FuseResidual(const ModelConfig& cfg, const Parameters<T>& params, const Tensor<T>& f1,
                       const Tensor<T>& frame, FusionCache<T>* cache) {
  Tensor<T> y = Conv(params, "fusion", FusionGeometry(cfg), f1, cache ? &cache->conv : nullptr);
  AddInPlace(y, frame);
  return y;
}

template <typename T>
Tensor<T> FuseResidualBackward(const ModelConfig&, Parameters<T>& params, const FusionCache<T>& cache,
                               const Tensor<T>& grad) {
  return ConvBack(params, "fusion", cache.conv, grad);
}

template <typename T>
std::vector<Tensor<T>> EnhanceSequence(const ModelConfig& cfg, const Parameters<T>& params,
                                       std::span<const Tensor<T>> frames, SequenceTape<T>* tape) {
  Require(!frames.empty(), ErrorCode::kEmpty, "EnhanceSequence: empty frame sequence");
  const int n = static_cast<int>(frames.size());
  for (const auto& f : frames) RequireSameShape(f.shape(), frames.front().shape(), "EnhanceSequence frames");
  if (tape) {
    // resize keeps the column buffers of earlier calls allocated.
    tape->pre.resize(n);
    tape->rf.resize(n);
    tape->fusion.resize(n);
  }

  std::vector<Tensor<T>> features;
  features.reserve(n);
  for (int j = 0; j < n; ++j) features.push_back(PreExtract(cfg, params, frames[j], tape ? &tape->pre[j] : nullptr));

  Tensor<T> hidden(features.front().shape());
  std::vector<Tensor<T>> outputs;
  outputs.reserve(n);
  std::vector<const Tensor<T>*> window(cfg.future_window + 1);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k <= cfg.future_window; ++k) window[k] = &features[WindowFrameIndex(i, k, n)];
    hidden = RfForwardImpl<T>(cfg, params, window, hidden, tape ? &tape->rf[i] : nullptr);
    outputs.push_back(FuseResidual(cfg, params, hidden, frames[i], tape ? &tape->fusion[i] : nullptr));
  }
  return outputs;
}

template <typename T>
std::vector<Tensor<T>> EnhanceSequenceBackward(const ModelConfig& cfg, Parameters<T>& params,
                                               const SequenceTape<T>& tape, std::span<const Tensor<T>> grads) {
  const int n = static_cast<int>(tape.rf.size());
  Require(static_cast<int>(grads.size()) == n, ErrorCode::kShape,
          "EnhanceSequenceBackward: " + std::to_string(grads.size()) + " gradients for " + std::to_string(n) +
              " outputs");
  std::vector<Tensor<T>> grad_frames(grads.begin(), grads.end());
  std::vector<Tensor<T>> grad_features(n);
  Tensor<T> carry;
  for (int i = n - 1; i >= 0; --i) {
    Tensor<T> g_f1 = FuseResidualBackward(cfg, params, tape.fusion[i], grads[i]);
    if (!carry.empty()) AddInPlace(g_f1, carry);
    RfGradients<T> rg = RfBackward(cfg, params, tape.rf[i], g_f1);
    for (int k = 0; k <= cfg.future_window; ++k) {
      Tensor<T>& slot = grad_features[WindowFrameIndex(i, k, n)];
      if (slot.empty()) slot = std::move(rg.window[k]);
      else AddInPlace(slot, rg.window[k]);
    }
    carry = std::move(rg.hidden);
  }
  for (int j = 0; j < n; ++j)
    AddInPlace(grad_frames[j], PreExtractBackward(cfg, params, tape.pre[j], std::move(grad_features[j])));
  return grad_frames;
}

#define VIG_INSTANTIATE_MODEL(T)                                                                               \
  template class Parameters<T>;                                                                                \
  template Parameters<T> MakeParameters<T>(const ModelConfig&);                                                \
  template void InitializeParameters<T>(Parameters<T>&, std::uint64_t);                                        \
  template Tensor<T> PreExtract<T>(const ModelConfig&, const Parameters<T>&, const Tensor<T>&,                 \
                                   PreExtractCache<T>*);                                                       \
  template Tensor<T> PreExtractBackward<T>(const ModelConfig&, Parameters<T>&, const PreExtractCache<T>&,      \
                                           Tensor<T>);                                                         \
  template Tensor<T> TsdBlock<T>(const ModelConfig&, const Parameters<T>&, const Tensor<T>&, int,              \
                                 TsdCache<T>*);                                                                \
  template Tensor<T> TsdBlockBackward<T>(const ModelConfig&, Parameters<T>&, const TsdCache<T>&, Tensor<T>,    \
                                         int);                                                                 \
  template Tensor<T> TdBlock<T>(const ModelConfig&, const Parameters<T>&, const Tensor<T>&, TdCache<T>*);      \
  template Tensor<T> TdBlockBackward<T>(const ModelConfig&, Parameters<T>&, const TdCache<T>&, Tensor<T>);     \
  template Tensor<T> SuBlock<T>(const ModelConfig&, const Parameters<T>&, const Tensor<T>&, const Tensor<T>&,  \
                                int, SuCache<T>*);                                                             \
  template Tensor<T> SuBlockBackward<T>(const ModelConfig&, Parameters<T>&, const SuCache<T>&, Tensor<T>,      \
                                        int);                                                                  \
  template Tensor<T> RfForward<T>(const ModelConfig&, const Parameters<T>&, std::span<const Tensor<T>>,        \
                                  const Tensor<T>&, RfCache<T>*);                                              \
  template RfGradients<T> RfBackward<T>(const ModelConfig&, Parameters<T>&, const RfCache<T>&,                 \
                                        const Tensor<T>&);                                                     \
  template Tensor<T> FuseResidual<T>(const ModelConfig&, const Parameters<T>&, const Tensor<T>&,               \
                                     const Tensor<T>&, FusionCache<T>*);                                       \
  template Tensor<T> FuseResidualBackward<T>(const ModelConfig&, Parameters<T>&, const FusionCache<T>&,        \
                                             const Tensor<T>&);                                                \
  template std::vector<Tensor<T>> EnhanceSequence<T>(const ModelConfig&, const Parameters<T>&,                 \
                                                     std::span<const Tensor<T>>, SequenceTape<T>*);            \
  template std::vector<Tensor<T>> EnhanceSequenceBackward<T>(const ModelConfig&, Parameters<T>&,               \
                                                             const SequenceTape<T>&,                           \
                                                             std::span<const Tensor<T>>);

VIG_INSTANTIATE_MODEL(float)
VIG_INSTANTIATE_MODEL(double)

}  // namespace vig
