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


// Microbenchmarks for the convolution kernels and one recurrence step.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "vig/model.h"
#include "vig/tensor_ops.h"

namespace vig {
namespace {

Tensor<float> Random(const Shape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  Tensor<float> t(shape);
  for (auto& v : t.vec()) v = u(rng);
  return t;
}

ConvGeometry Geometry(int channels, int temporal) {
  return {.in_channels = channels, .out_channels = channels, .temporal_kernel = temporal, .kernel = 3};
}

void BM_ConvForward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0)), size = static_cast<int>(state.range(1));
  const ConvGeometry g = Geometry(c, 2);
  const auto x = Random({3, c, size, size}, 1);
  const auto w = Random(g.weight_shape(), 2);
  const auto b = Random(g.bias_shape(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(ConvForward(g, x, w, b));
  state.SetItemsProcessed(state.iterations() * 2LL * size * size);
}
BENCHMARK(BM_ConvForward)->Args({16, 32})->Args({16, 64})->Args({32, 32})->Unit(benchmark::kMicrosecond);

void BM_ConvBackward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0)), size = static_cast<int>(state.range(1));
  const ConvGeometry g = Geometry(c, 2);
  const auto x = Random({3, c, size, size}, 1);
  const auto w = Random(g.weight_shape(), 2);
  const auto b = Random(g.bias_shape(), 3);
  ConvCache<float> cache;
  const auto y = ConvForward(g, x, w, b, &cache);
  const auto grad = Random(y.shape(), 4);
  Tensor<float> gw(g.weight_shape()), gb(g.bias_shape());
  for (auto _ : state) benchmark::DoNotOptimize(ConvBackward(cache, w, grad, gw, gb));
}
BENCHMARK(BM_ConvBackward)->Args({16, 32})->Args({16, 64})->Args({32, 32})->Unit(benchmark::kMicrosecond);

void BM_EnhanceSequence(benchmark::State& state) {
  ModelConfig cfg;
  cfg.base_channels = static_cast<int>(state.range(0));
  cfg.zero_fusion_init = false;
  const int size = static_cast<int>(state.range(1));
  const auto params = CreateModel<float>(cfg, 7);
  std::vector<Tensor<float>> frames;
  for (int i = 0; i < 8; ++i) frames.push_back(Random({1, size, size}, 10 + i));
  for (auto _ : state) benchmark::DoNotOptimize(EnhanceSequence<float>(cfg, params, frames));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(frames.size()));
}
BENCHMARK(BM_EnhanceSequence)->Args({8, 64})->Args({16, 64})->Args({16, 128})->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  ModelConfig cfg;
  cfg.base_channels = 8;
  cfg.zero_fusion_init = false;
  auto params = CreateModel<float>(cfg, 7);
  std::vector<Tensor<float>> frames;
  for (int i = 0; i < 6; ++i) frames.push_back(Random({1, 64, 64}, 20 + i));
  std::vector<Tensor<float>> grads(frames.size(), Random({1, 64, 64}, 30));
  for (auto _ : state) {
    SequenceTape<float> tape;
    benchmark::DoNotOptimize(EnhanceSequence<float>(cfg, params, frames, &tape));
    benchmark::DoNotOptimize(EnhanceSequenceBackward<float>(cfg, params, tape, grads));
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace vig

BENCHMARK_MAIN();
