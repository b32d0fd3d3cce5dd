// Copyright 2026 The HME Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hme/data/synth.hpp"
#include "hme/eval/benchmark.hpp"
#include "hme/model/dynamics.hpp"
#include "hme/model/embedding.hpp"
#include "hme/model/robot_mapping.hpp"

namespace hme {

inline constexpr const char* kVersion = "0.1.0";

// Invalid configuration; `path` is the dotted field path, e.g. "dynamics.epochs".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& msg)
      : std::runtime_error(path + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct PipelinePaths {
  std::filesystem::path dataset = "out/dataset.jsonl";
  std::filesystem::path checkpoints = "out/checkpoints";
  std::filesystem::path reports = "out/reports";
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  Action action = Action::kHandShake;
  int refresh_every = 4;
  std::filesystem::path static_dir = "web";
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  PipelinePaths paths;
  SynthConfig hhi;
  SynthConfig hri;
  double test_fraction = 0.2;
  EmbeddingConfig human_embedding;
  EmbeddingConfig robot_embedding;
  DynamicsConfig dynamics;
  RobotMappingConfig robot;
  BenchmarkConfig eval;
  ServeOptions serve;
};

// Stage seeds are derived from the global seed and the stage name.
std::uint64_t derive_seed(std::uint64_t global, std::string_view stage);

PipelineConfig default_pipeline_config();
// Re-derives every stage seed from cfg.seed.
void apply_seed(PipelineConfig& cfg, std::uint64_t seed);

// Full tree. Stage seeds are omitted; they follow from "seed".
nlohmann::json to_json(const PipelineConfig& cfg);
// Values in `j` override the defaults. Throws ConfigError on unknown fields, wrong
// types, or out-of-range values.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::filesystem::path& toml_path);
PipelineConfig parse_pipeline_config(std::string_view toml_text);

// Hash of everything that shapes artifacts (paths and serve options excluded).
std::string pipeline_config_hash(const PipelineConfig& cfg);

}  // namespace hme
