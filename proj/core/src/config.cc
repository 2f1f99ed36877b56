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

#include "vig/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

namespace vig {

namespace fs = std::filesystem;

Schedule RunConfig::schedule() const {
  if (tgd_periods) return *tgd_periods;
  return Schedule::Progressive(tgd_sizes, tgd_ratio, train.pretrain_iters);
}

RunConfig PresetConfig(std::string_view name) {
  RunConfig cfg;
  cfg.preset = std::string(name);
  if (name == "paper") {
    return cfg;  // struct defaults are the full-scale settings
  }
  if (name == "desk") {
    cfg.model.base_channels = 8;
    cfg.train.batch_size = 1;
    cfg.train.crop = 64;
    cfg.train.clip_len = 6;
    cfg.train.pretrain_iters = 500;
    cfg.train.finetune_iters = 1500;
    cfg.train.lr_max = 2e-3;
    cfg.train.lr_min = 6e-4;
    cfg.train.log_every = 10;
    return cfg;
  }
  Fail(ErrorCode::kConfig, "--preset must be 'paper' or 'desk', got '" + std::string(name) + "'");
}

namespace {

[[noreturn]] void BadValue(std::string_view key, std::string_view value, const char* expected) {
  Fail(ErrorCode::kConfig, std::string(key) + ": cannot parse '" + std::string(value) + "' as " + expected);
}

template <typename Int>
Int ParseInt(std::string_view key, std::string_view v) {
  Int out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) BadValue(key, v, "an integer");
  return out;
}

double ParseDouble(std::string_view key, std::string_view v) {
  std::string s(v);
  try {
    std::size_t used = 0;
    double out = std::stod(s, &used);
    if (used == s.size()) return out;
  } catch (const std::exception&) {
  }
  BadValue(key, v, "a number");
}

bool ParseBool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  BadValue(key, v, "a boolean");
}

std::vector<int> ParseIntList(std::string_view key, std::string_view v) {
  std::vector<int> out;
  std::stringstream ss{std::string(v)};
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(ParseInt<int>(key, item));
  if (out.empty()) BadValue(key, v, "a comma-separated integer list");
  return out;
}

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Shortest text that parses back to the same double.
std::string Str(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

void ApplySetting(RunConfig& cfg, std::string_view key, std::string_view value) {
  auto& m = cfg.model;
  auto& t = cfg.train;
  if (key == "model.base_channels") m.base_channels = ParseInt<int>(key, value);
  else if (key == "model.future_window") m.future_window = ParseInt<int>(key, value);
  else if (key == "model.leaky_slope") m.leaky_slope = ParseDouble(key, value);
  else if (key == "model.zero_fusion_init") m.zero_fusion_init = ParseBool(key, value);
  else if (key == "train.batch_size") t.batch_size = ParseInt<int>(key, value);
  else if (key == "train.crop") t.crop = ParseInt<int>(key, value);
  else if (key == "train.clip_len") t.clip_len = ParseInt<int>(key, value);
  else if (key == "train.pretrain_iters") t.pretrain_iters = ParseInt<long>(key, value);
  else if (key == "train.finetune_iters") t.finetune_iters = ParseInt<long>(key, value);
  else if (key == "train.lr_max") t.lr_max = ParseDouble(key, value);
  else if (key == "train.lr_min") t.lr_min = ParseDouble(key, value);
  else if (key == "train.beta1") t.beta1 = ParseDouble(key, value);
  else if (key == "train.beta2") t.beta2 = ParseDouble(key, value);
  else if (key == "train.adam_eps") t.adam_eps = ParseDouble(key, value);
  else if (key == "train.charbonnier_eps") t.charbonnier_eps = ParseDouble(key, value);
  else if (key == "train.grad_clip") t.grad_clip = ParseDouble(key, value);
  else if (key == "train.augment") t.augment = ParseBool(key, value);
  else if (key == "train.seed") t.seed = ParseInt<std::uint64_t>(key, value);
  else if (key == "train.checkpoint_every") t.checkpoint_every = ParseInt<long>(key, value);
  else if (key == "train.log_every") t.log_every = ParseInt<long>(key, value);
  else if (key == "tgd.ratio") cfg.tgd_ratio = ParseDouble(key, value);
  else if (key == "tgd.sizes") cfg.tgd_sizes = ParseIntList(key, value);
  else if (key == "tgd.periods" && value == "-") cfg.tgd_periods = Schedule{};
  else if (key == "tgd.periods") {
    try {
      cfg.tgd_periods = Schedule::Parse(std::string(value));
    } catch (const Error& e) {
      Fail(ErrorCode::kConfig, e.what());
    }
  } else if (key == "data.manifest") cfg.manifest = std::string(value);
  else if (key == "data.out_dir") cfg.out_dir = std::string(value);
  else Fail(ErrorCode::kConfig, "unknown configuration key '" + std::string(key) + "'");
}

void ApplyAssignment(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    Fail(ErrorCode::kConfig, "expected key=value, got '" + std::string(assignment) + "'");
  ApplySetting(cfg, Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)));
}

void ApplyConfigFile(RunConfig& cfg, const fs::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kConfig, path.string() + ": cannot open config file");
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string_view s = Trim(line);
    if (s.empty() || s.front() == '#') continue;
    try {
      ApplyAssignment(cfg, s);
    } catch (const Error& e) {
      Fail(e.code(), path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

void ValidateRunConfig(const RunConfig& cfg) {
  cfg.model.Validate();
  cfg.train.Validate();
  Require(cfg.tgd_ratio >= 0.0 && cfg.tgd_ratio <= 1.0, ErrorCode::kConfig,
          "tgd.ratio must lie in [0, 1], got " + Str(cfg.tgd_ratio));
  const Schedule s = cfg.schedule();
  if (cfg.train.pretrain_iters > 0) {
    s.Validate(cfg.train.crop);
    Require(s.total_iterations() == cfg.train.pretrain_iters, ErrorCode::kConfig,
            "tgd.periods total " + std::to_string(s.total_iterations()) + " differs from train.pretrain_iters " +
                std::to_string(cfg.train.pretrain_iters));
  }
}

Settings ToSettings(const ModelConfig& m, const TrainConfig& t, const Schedule& schedule) {
  return {
      {"model.base_channels", std::to_string(m.base_channels)},
      {"model.future_window", std::to_string(m.future_window)},
      {"model.leaky_slope", Str(m.leaky_slope)},
      {"model.zero_fusion_init", m.zero_fusion_init ? "true" : "false"},
      {"train.batch_size", std::to_string(t.batch_size)},
      {"train.crop", std::to_string(t.crop)},
      {"train.clip_len", std::to_string(t.clip_len)},
      {"train.pretrain_iters", std::to_string(t.pretrain_iters)},
      {"train.finetune_iters", std::to_string(t.finetune_iters)},
      {"train.lr_max", Str(t.lr_max)},
      {"train.lr_min", Str(t.lr_min)},
      {"train.beta1", Str(t.beta1)},
      {"train.beta2", Str(t.beta2)},
      {"train.adam_eps", Str(t.adam_eps)},
      {"train.charbonnier_eps", Str(t.charbonnier_eps)},
      {"train.grad_clip", Str(t.grad_clip)},
      {"train.augment", t.augment ? "true" : "false"},
      {"train.seed", std::to_string(t.seed)},
      {"train.checkpoint_every", std::to_string(t.checkpoint_every)},
      {"train.log_every", std::to_string(t.log_every)},
      {"tgd.periods", schedule.periods.empty() ? std::string("-") : schedule.ToString()},
  };
}

std::string FormatSettings(const Settings& settings) {
  std::string out;
  for (const auto& [k, v] : settings) out += k + "=" + v + "\n";
  return out;
}

std::vector<std::string> DescribeKeys(const RunConfig& d) {
  std::vector<std::string> out;
  for (const auto& [k, v] : ToSettings(d.model, d.train, d.schedule())) {
    if (k == "tgd.periods") continue;
    out.push_back(k + " (default " + v + ")");
  }
  std::string sizes;
  for (std::size_t i = 0; i < d.tgd_sizes.size(); ++i) sizes += (i ? "," : "") + std::to_string(d.tgd_sizes[i]);
  out.push_back("tgd.sizes (default " + sizes + ")");
  out.push_back("tgd.ratio (default " + Str(d.tgd_ratio) + ")");
  out.push_back("tgd.periods (default derived from tgd.sizes, tgd.ratio, train.pretrain_iters)");
  out.push_back("data.manifest (default none)");
  out.push_back("data.out_dir (default " + d.out_dir.string() + ")");
  return out;
}

}  // namespace vig
