// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "uselab/curate.hpp"
#include "uselab/degrade.hpp"
#include "uselab/wav.hpp"

namespace uselab::degrade {

struct SimulateOptions {
  std::string out_dir;
  uint64_t root_seed = 0;
  size_t workers = 1;
  rir::TargetSpec target;
  WavEncoding encoding = WavEncoding::kFloat32;
};

struct SimulateItem {
  curate::ManifestEntry entry;
  Recipe recipe;
};

// Loads every *.wav under `dir` keyed by file stem.
std::map<std::string, AudioBuffer> load_wav_dir(const std::string& dir);

// Degrades every item (clean audio at entry.path) and writes
// <id>_input.wav, <id>_target.wav plus metadata.jsonl under out_dir.
// Items are independent, so the result is identical for any worker count;
// the returned summary includes a content digest that certifies it.
nlohmann::json simulate(const std::vector<SimulateItem>& items,
                        const AssetBank& bank, const SimulateOptions& opts);

}  // namespace uselab::degrade
