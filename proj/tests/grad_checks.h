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

#ifndef VIG_TESTS_GRAD_CHECKS_H_
#define VIG_TESTS_GRAD_CHECKS_H_

// Finite-difference checks for every parameterized operation of the network.
// Each returns the worst relative error over all parameters and inputs of
// one random instance.

#include <random>
#include <string>
#include <vector>

#include "test_util.h"
#include "vig/model.h"

namespace vig::testing {

inline ModelConfig TinyModel() {
  ModelConfig cfg;
  cfg.base_channels = 2;
  cfg.future_window = 3;
  return cfg;
}

// Worst error over every parameter whose name starts with `prefix`.
inline double ParameterError(Parameters<double>& p, const Parameters<double>& analytic, const std::string& prefix,
                             const std::function<double()>& f) {
  double worst = 0;
  for (auto& e : p.entries())
    if (e.name.rfind(prefix, 0) == 0) worst = std::max(worst, MaxTensorError(e.value, analytic.grad(e.name), f));
  return worst;
}

inline double CheckPreExtract(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const ModelConfig cfg = TinyModel();
  auto p = MakeParameters<double>(cfg);
  RandomizeParameters(p, rng);
  auto x = RandomTensor<double>({1, 8, 8}, rng, 0, 1);
  PreExtractCache<double> cache;
  const auto y = PreExtract(cfg, p, x, &cache);
  const auto r = RandomTensor<double>(y.shape(), rng);
  p.ZeroGrad();
  const auto gx = PreExtractBackward(cfg, p, cache, r);
  auto f = [&] { return Dot(r, PreExtract(cfg, p, x)); };
  return std::max(ParameterError(p, p, "pre.", f), MaxTensorError(x, gx, f));
}

inline double CheckTsd(std::uint64_t seed, int block) {
  std::mt19937_64 rng(seed);
  const ModelConfig cfg = TinyModel();
  auto p = MakeParameters<double>(cfg);
  RandomizeParameters(p, rng);
  const int frames = block == 1 ? cfg.stack_length() : cfg.stack_length() - 1;
  const int size = block == 1 ? 4 : 2;
  auto x = RandomTensor<double>({frames, cfg.channels_at(block - 1), size, size}, rng);
  TsdCache<double> cache;
  const auto y = TsdBlock(cfg, p, x, block, &cache);
  const auto r = RandomTensor<double>(y.shape(), rng);
  p.ZeroGrad();
  const auto gx = TsdBlockBackward(cfg, p, cache, r, block);
  auto f = [&] { return Dot(r, TsdBlock(cfg, p, x, block)); };
  return std::max(ParameterError(p, p, "tsd" + std::to_string(block) + ".", f), MaxTensorError(x, gx, f));
}

inline double CheckTd(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const ModelConfig cfg = TinyModel();
  auto p = MakeParameters<double>(cfg);
  RandomizeParameters(p, rng);
  auto x = RandomTensor<double>({cfg.td_frames(), cfg.channels_at(2), 2, 2}, rng);
  TdCache<double> cache;
  const auto y = TdBlock(cfg, p, x, &cache);
  const auto r = RandomTensor<double>(y.shape(), rng);
  p.ZeroGrad();
  const auto gx = TdBlockBackward(cfg, p, cache, r);
  auto f = [&] { return Dot(r, TdBlock(cfg, p, x)); };
  return std::max(ParameterError(p, p, "td.", f), MaxTensorError(x, gx, f));
}

inline double CheckSu(std::uint64_t seed, int block) {
  std::mt19937_64 rng(seed);
  const ModelConfig cfg = TinyModel();
  auto p = MakeParameters<double>(cfg);
  RandomizeParameters(p, rng);
  const int level = block == 1 ? 2 : 1;
  const int size = block == 1 ? 2 : 4;
  auto x = RandomTensor<double>({cfg.channels_at(level), size, size}, rng);
  auto skip = RandomTensor<double>(x.shape(), rng);
  SuCache<double> cache;
  const auto y = SuBlock(cfg, p, x, skip, block, &cache);
  const auto r = RandomTensor<double>(y.shape(), rng);
  p.ZeroGrad();
  const auto gx = SuBlockBackward(cfg, p, cache, r, block);
  auto f = [&] { return Dot(r, SuBlock(cfg, p, x, skip, block)); };
  return std::max({ParameterError(p, p, "su" + std::to_string(block) + ".", f), MaxTensorError(x, gx, f),
                   MaxTensorError(skip, gx, f)});
}

inline double CheckRf(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const ModelConfig cfg = TinyModel();
  auto p = MakeParameters<double>(cfg);
  RandomizeParameters(p, rng);
  std::vector<Tensor<double>> window;
  for (int i = 0; i <= cfg.future_window; ++i) window.push_back(RandomTensor<double>({cfg.base_channels, 8, 8}, rng));
  auto hidden = RandomTensor<double>({cfg.base_channels, 8, 8}, rng);
  RfCache<double> cache;
  const auto y = RfForward<double>(cfg, p, window, hidden, &cache);
  const auto r = RandomTensor<double>(y.shape(), rng);
  p.ZeroGrad();
  const auto g = RfBackward(cfg, p, cache, r);
  auto f = [&] { return Dot(r, RfForward<double>(cfg, p, window, hidden)); };
  double worst = std::max(ParameterError(p, p, "", f), MaxTensorError(hidden, g.hidden, f));
  for (std::size_t i = 0; i < window.size(); ++i) worst = std::max(worst, MaxTensorError(window[i], g.window[i], f));
  return worst;
}

inline double CheckFusion(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const ModelConfig cfg = TinyModel();
  auto p = MakeParameters<double>(cfg);
  RandomizeParameters(p, rng);
  auto f1 = RandomTensor<double>({cfg.base_channels, 8, 8}, rng);
  auto frame = RandomTensor<double>({1, 8, 8}, rng, 0, 1);
  FusionCache<double> cache;
  const auto y = FuseResidual(cfg, p, f1, frame, &cache);
  const auto r = RandomTensor<double>(y.shape(), rng);
  p.ZeroGrad();
  const auto gf1 = FuseResidualBackward(cfg, p, cache, r);
  auto f = [&] { return Dot(r, FuseResidual(cfg, p, f1, frame)); };
  return std::max({ParameterError(p, p, "fusion.", f), MaxTensorError(f1, gf1, f), MaxTensorError(frame, r, f)});
}

// Whole recurrence: every parameter and every input frame, through BPTT.
inline double CheckSequence(std::uint64_t seed, int frames = 3, int size = 4) {
  std::mt19937_64 rng(seed);
  const ModelConfig cfg = TinyModel();
  auto p = MakeParameters<double>(cfg);
  RandomizeParameters(p, rng);
  std::vector<Tensor<double>> xs;
  for (int i = 0; i < frames; ++i) xs.push_back(RandomTensor<double>({1, size, size}, rng, 0, 1));
  SequenceTape<double> tape;
  const auto ys = EnhanceSequence<double>(cfg, p, xs, &tape);
  std::vector<Tensor<double>> rs;
  for (const auto& y : ys) rs.push_back(RandomTensor<double>(y.shape(), rng));
  p.ZeroGrad();
  const auto gxs = EnhanceSequenceBackward<double>(cfg, p, tape, rs);
  auto f = [&] {
    const auto out = EnhanceSequence<double>(cfg, p, xs);
    double s = 0;
    for (std::size_t i = 0; i < out.size(); ++i) s += Dot(rs[i], out[i]);
    return s;
  };
  double worst = ParameterError(p, p, "", f);
  for (int i = 0; i < frames; ++i) worst = std::max(worst, MaxTensorError(xs[i], gxs[i], f));
  return worst;
}

}  // namespace vig::testing

#endif  // VIG_TESTS_GRAD_CHECKS_H_
