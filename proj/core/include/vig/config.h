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

#ifndef VIG_CONFIG_H_
#define VIG_CONFIG_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vig/model.h"
#include "vig/tgd.h"
#include "vig/train.h"

namespace vig {

// Merged run configuration. Sources apply in order: preset defaults, then a
// key=value config file, then command-line overrides.
//
// Keys carry a section prefix: model.*, train.*, tgd.*, data.*. The TGD
// schedule is either tgd.periods (explicit "w:ratio:iterations,...") or
// derived from tgd.sizes and tgd.ratio by splitting train.pretrain_iters
// evenly across the sizes.
struct RunConfig {
  std::string preset = "desk";
  ModelConfig model;
  TrainConfig train;
  std::vector<int> tgd_sizes{32, 16, 8, 4};
  double tgd_ratio = 0.9;
  std::optional<Schedule> tgd_periods;
  std::filesystem::path manifest;
  std::filesystem::path out_dir = "vig_run";

  Schedule schedule() const;
};

using Settings = std::vector<std::pair<std::string, std::string>>;

// "paper" (full-scale settings) or "desk" (laptop-scale).
RunConfig PresetConfig(std::string_view name);

// Throws Error(kConfig) naming the key on unknown keys or unparsable values.
void ApplySetting(RunConfig& cfg, std::string_view key, std::string_view value);
// Parses "key=value".
void ApplyAssignment(RunConfig& cfg, std::string_view assignment);
void ApplyConfigFile(RunConfig& cfg, const std::filesystem::path& path);

void ValidateRunConfig(const RunConfig& cfg);

// Model, train and tgd keys with round-trippable values (schedule written as
// explicit tgd.periods).
Settings ToSettings(const ModelConfig& model, const TrainConfig& train, const Schedule& schedule);
std::string FormatSettings(const Settings& settings);

// Every key with its preset default, for --help output.
std::vector<std::string> DescribeKeys(const RunConfig& defaults);

}  // namespace vig

#endif  // VIG_CONFIG_H_
