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

// Command-line front end: prepare, train, enhance, evaluate, sweep-mask and
// analyze-variance.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vig/commands.h"
#include "vig/config.h"

namespace {

namespace fs = std::filesystem;

struct Globals {
  std::string preset = "desk";
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
  std::string manifest;
};

// preset < config file < --set < dedicated flags.
vig::RunConfig Resolve(const Globals& g) {
  vig::RunConfig cfg = vig::PresetConfig(g.preset);
  if (!g.config_file.empty()) vig::ApplyConfigFile(cfg, g.config_file);
  for (const auto& s : g.sets) vig::ApplyAssignment(cfg, s);
  if (g.seed) cfg.train.seed = *g.seed;
  if (!g.out.empty()) cfg.out_dir = g.out;
  if (!g.manifest.empty()) cfg.manifest = g.manifest;
  return cfg;
}

std::string KeyFooter() {
  std::string out = "Configuration keys (desk preset defaults):\n";
  for (const auto& k : vig::DescribeKeys(vig::PresetConfig("desk"))) out += "  " + k + "\n";
  return out;
}

int Report(vig::ErrorCode code, const std::string& what) {
  const int exit_code = vig::ExitCodeFor(code);
  std::fprintf(stderr, "error: E%d %s: %s\n", exit_code, std::string(vig::ErrorCodeName(code)).c_str(), what.c_str());
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed video quality enhancement with a recurrent redundancy-filtering network"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  Globals g;
  app.add_option("--preset", g.preset, "Named defaults")->check(CLI::IsMember({"paper", "desk"}));
  app.add_option("--config", g.config_file, "key=value configuration file");
  app.add_option("--seed", g.seed, "Seed for every random choice (overrides train.seed)");
  app.add_option("--out", g.out, "Output directory");

  // prepare
  vig::PrepareOptions prep;
  auto* prepare = app.add_subcommand("prepare", "Write degraded companions and a paired manifest");
  prepare->add_option("--manifest", prep.manifest, "Source manifest");
  prepare->add_option("--q", prep.q_levels, "Degrader quantizer steps (8-bit code values)")->delimiter(',');
  prepare->add_option("--synthesize", prep.synthesize, "Generate this many synthetic raw videos instead");
  prepare->add_option("--width", prep.width, "Synthetic width");
  prepare->add_option("--height", prep.height, "Synthetic height");
  prepare->add_option("--frames", prep.frames, "Synthetic frame count");

  // train
  std::string stage = "both";
  vig::TrainOptions train_opts;
  std::string init;
  auto* train = app.add_subcommand("train", "Pretrain with truth guidance and/or finetune");
  train->add_option("--manifest", g.manifest, "Paired corpus manifest (data.manifest)");
  train->add_option("--stage", stage, "Stages to run")->check(CLI::IsMember({"pretrain", "finetune", "both"}));
  train->add_flag("--no-tgd", train_opts.no_tgd, "Finetune from scratch, skipping pretraining");
  train->add_option("--init", init, "Pretrain checkpoint for --stage finetune (default <out>/pretrain)");
  train->add_flag("--resume", train_opts.resume, "Continue interrupted stages from <out>");
  train->add_option("--set", g.sets, "Override a configuration key (key=value), repeatable");
  train->footer(KeyFooter());

  // enhance
  vig::EnhanceOptions enh;
  auto* enhance = app.add_subcommand("enhance", "Enhance the luma plane of a YUV420 video");
  enhance->add_option("--checkpoint", enh.checkpoint, "Checkpoint directory")->required();
  enhance->add_option("--input", enh.input, "Compressed YUV420 file")->required();
  enhance->add_option("--output", enh.output, "Enhanced YUV420 file")->required();
  enhance->add_option("--width", enh.width, "Frame width")->required();
  enhance->add_option("--height", enh.height, "Frame height")->required();

  // evaluate
  vig::EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score compressed and enhanced videos against raw");
  evaluate->add_option("--raw", ev.raw, "Raw YUV420 file")->required();
  evaluate->add_option("--comp", ev.comp, "Compressed YUV420 file")->required();
  evaluate->add_option("--enhanced", ev.enhanced, "Enhanced YUV420 file")->required();
  evaluate->add_option("--width", ev.width, "Frame width")->required();
  evaluate->add_option("--height", ev.height, "Frame height")->required();
  evaluate->add_option("--title", ev.title, "Plot title");

  // sweep-mask
  vig::SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep-mask", "Train one model per (mask size, ratio) cell");
  sweep_cmd->add_option("--manifest", g.manifest, "Paired corpus manifest; the last video is held out");
  sweep_cmd->add_option("--sizes", sweep.sizes, "Mask sizes")->delimiter(',');
  sweep_cmd->add_option("--ratios", sweep.ratios, "Raw-block ratios")->delimiter(',');
  sweep_cmd->add_option("--set", g.sets, "Override a configuration key (key=value), repeatable");
  sweep_cmd->footer(KeyFooter());

  // analyze-variance
  std::string var_manifest;
  auto* variance = app.add_subcommand("analyze-variance", "Mean 64x64 patch variance of raw and degraded videos");
  variance->add_option("--manifest", var_manifest, "Paired corpus manifest")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n') c = ' ';
    return Report(vig::ErrorCode::kConfig, msg);
  }

  try {
    if (*prepare) {
      prep.out_dir = g.out;
      prep.seed = g.seed.value_or(0);
      vig::CmdPrepare(prep, std::cout);
    } else if (*train) {
      train_opts.config = Resolve(g);
      train_opts.stage = vig::ParseStageRequest(stage);
      if (!init.empty()) train_opts.init = fs::path(init);
      vig::CmdTrain(train_opts, std::cout);
    } else if (*enhance) {
      vig::CmdEnhance(enh, std::cout);
    } else if (*evaluate) {
      ev.out_dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
      vig::CmdEvaluate(ev, std::cout);
    } else if (*sweep_cmd) {
      sweep.config = Resolve(g);
      vig::CmdSweepMask(sweep, std::cout);
    } else if (*variance) {
      std::cout << vig::FormatVarianceTable(vig::CmdAnalyzeVariance(var_manifest, std::cerr));
    }
  } catch (const vig::Error& e) {
    return Report(e.code(), e.what());
  } catch (const fs::filesystem_error& e) {
    return Report(vig::ErrorCode::kIo, e.what());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: E4 internal: %s\n", e.what());
    return 4;
  }
  return 0;
}
