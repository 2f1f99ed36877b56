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

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "vig/config.h"
#include "vig/train.h"

namespace vig {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMagic = "vig-checkpoint 1";

std::string ShapeToken(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
  return out;
}

Shape ParseShapeToken(const std::string& tok, const std::string& where) {
  Shape s;
  std::stringstream ss(tok);
  std::string item;
  while (std::getline(ss, item, 'x')) {
    try {
      s.push_back(std::stoi(item));
    } catch (const std::exception&) {
      Fail(ErrorCode::kParse, where + ": bad shape '" + tok + "'");
    }
  }
  return s;
}

struct TensorRecord {
  std::string role, name;
  Shape shape;
  std::size_t offset = 0, count = 0;
};

void WriteFloats(std::ofstream& out, const Tensor<float>& t) {
  static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(float)));
}

}  // namespace

void SaveCheckpoint(const fs::path& dir, const Checkpoint& ckpt) {
  fs::create_directories(dir);
  const auto entries = ckpt.params.entries();
  Require(ckpt.optimizer.m.size() == entries.size() && ckpt.optimizer.v.size() == entries.size(), ErrorCode::kShape,
          "SaveCheckpoint: optimizer state does not match parameters");

  // Write to temporaries and rename so an interrupted save leaves the old
  // checkpoint readable.
  const fs::path bin_tmp = dir / "tensors.bin.tmp", man_tmp = dir / "manifest.txt.tmp";
  std::ofstream bin(bin_tmp, std::ios::binary | std::ios::trunc);
  std::ofstream man(man_tmp, std::ios::trunc);
  Require(bin && man, ErrorCode::kIo, dir.string() + ": cannot write checkpoint");

  man << kMagic << "\n";
  for (const auto& [k, v] : ToSettings(ckpt.model, ckpt.train, ckpt.schedule)) man << "config " << k << "=" << v << "\n";
  man << "stage " << StageName(ckpt.stage) << "\n";
  man << "iteration " << ckpt.iteration << "\n";
  man << "tgd " << (ckpt.tgd ? 1 : 0) << "\n";
  man << "seed " << ckpt.train.seed << "\n";
  man << "adam.step " << ckpt.optimizer.step << "\n";
  std::size_t offset = 0;
  auto emit = [&](const char* role, const std::string& name, const Tensor<float>& t) {
    man << "tensor " << role << " " << name << " " << ShapeToken(t.shape()) << " " << offset << " " << t.size() << "\n";
    WriteFloats(bin, t);
    offset += t.size() * sizeof(float);
  };
  for (std::size_t i = 0; i < entries.size(); ++i) emit("param", entries[i].name, entries[i].value);
  for (std::size_t i = 0; i < entries.size(); ++i) emit("adam.m", entries[i].name, ckpt.optimizer.m[i]);
  for (std::size_t i = 0; i < entries.size(); ++i) emit("adam.v", entries[i].name, ckpt.optimizer.v[i]);
  bin.close();
  man.close();
  Require(bin.good() && man.good(), ErrorCode::kIo, dir.string() + ": checkpoint write failed");
  fs::rename(bin_tmp, dir / "tensors.bin");
  fs::rename(man_tmp, dir / "manifest.txt");
}

Checkpoint LoadCheckpoint(const fs::path& dir) {
  const fs::path man_path = dir / "manifest.txt", bin_path = dir / "tensors.bin";
  std::ifstream man(man_path);
  Require(static_cast<bool>(man), ErrorCode::kIo, man_path.string() + ": cannot open checkpoint manifest");
  std::string line;
  Require(std::getline(man, line) && line == kMagic, ErrorCode::kParse,
          man_path.string() + ": not a checkpoint manifest");

  RunConfig cfg;
  Checkpoint ckpt;
  std::vector<TensorRecord> records;
  int n = 1;
  while (std::getline(man, line)) {
    ++n;
    if (line.empty()) continue;
    const std::string where = man_path.string() + ":" + std::to_string(n);
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    try {
      if (kind == "config") {
        std::string kv;
        ls >> kv;
        ApplyAssignment(cfg, kv);
      } else if (kind == "stage") {
        std::string s;
        ls >> s;
        ckpt.stage = ParseStage(s);
      } else if (kind == "iteration") {
        ls >> ckpt.iteration;
      } else if (kind == "tgd") {
        int v = 1;
        ls >> v;
        ckpt.tgd = v != 0;
      } else if (kind == "seed") {
        std::uint64_t s = 0;
        ls >> s;
        cfg.train.seed = s;
      } else if (kind == "adam.step") {
        ls >> ckpt.optimizer.step;
      } else if (kind == "tensor") {
        TensorRecord r;
        std::string shape;
        ls >> r.role >> r.name >> shape >> r.offset >> r.count;
        r.shape = ParseShapeToken(shape, where);
        records.push_back(std::move(r));
      } else {
        Fail(ErrorCode::kParse, "unknown record '" + kind + "'");
      }
      Require(!ls.fail(), ErrorCode::kParse, "malformed record");
    } catch (const Error& e) {
      Fail(ErrorCode::kParse, where + ": " + e.what());
    }
  }

  ckpt.model = cfg.model;
  ckpt.train = cfg.train;
  ckpt.schedule = cfg.tgd_periods ? *cfg.tgd_periods : Schedule{};
  ckpt.model.Validate();
  ckpt.params = MakeParameters<float>(ckpt.model);
  ckpt.optimizer.m.clear();
  ckpt.optimizer.v.clear();
  for (const auto& e : ckpt.params.entries()) {
    ckpt.optimizer.m.emplace_back(e.value.shape());
    ckpt.optimizer.v.emplace_back(e.value.shape());
  }

  std::ifstream bin(bin_path, std::ios::binary);
  Require(static_cast<bool>(bin), ErrorCode::kIo, bin_path.string() + ": cannot open checkpoint tensors");
  const auto bin_size = fs::file_size(bin_path);
  const auto entries = ckpt.params.entries();
  Require(records.size() == 3 * entries.size(), ErrorCode::kShape,
          dir.string() + ": checkpoint holds " + std::to_string(records.size()) + " tensors, model expects " +
              std::to_string(3 * entries.size()));
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t i = r % entries.size();
    const char* role = r < entries.size() ? "param" : r < 2 * entries.size() ? "adam.m" : "adam.v";
    Tensor<float>& dst = r < entries.size() ? entries[i].value
                         : r < 2 * entries.size() ? ckpt.optimizer.m[i]
                                                  : ckpt.optimizer.v[i];
    Require(rec.role == role && rec.name == entries[i].name, ErrorCode::kShape,
            dir.string() + ": expected tensor " + role + " " + entries[i].name + ", found " + rec.role + " " +
                rec.name);
    Require(rec.shape == dst.shape() && rec.count == dst.size(), ErrorCode::kShape,
            dir.string() + ": tensor " + rec.name + " has shape " + ShapeString(rec.shape) + ", model expects " +
                ShapeString(dst.shape()));
    Require(rec.offset + rec.count * sizeof(float) <= bin_size, ErrorCode::kIo,
            bin_path.string() + ": truncated at tensor " + rec.name);
    bin.seekg(static_cast<std::streamoff>(rec.offset));
    bin.read(reinterpret_cast<char*>(dst.data()), static_cast<std::streamsize>(rec.count * sizeof(float)));
    Require(bin.good(), ErrorCode::kIo, bin_path.string() + ": read failed at tensor " + rec.name);
  }
  return ckpt;
}

}  // namespace vig
