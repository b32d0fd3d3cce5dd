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

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hme/app/config.hpp"
#include "hme/data/split.hpp"
#include "hme/model/baselines.hpp"

namespace hme {

// A stage ran before its prerequisite. `step` is 1-4 for the four training steps,
// 0 for the synthetic dataset.
class MissingStageError : public std::runtime_error {
 public:
  MissingStageError(int step, const std::string& msg) : std::runtime_error(msg), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// An artifact was produced by a different configuration.
class HashMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ArtifactPaths {
  std::filesystem::path dataset;
  std::filesystem::path dataset_meta;
  std::filesystem::path human_embedding;
  std::filesystem::path dynamics;
  std::filesystem::path robot_embedding;
  std::filesystem::path robot_hri;
  std::filesystem::path raw_hr;
  std::filesystem::path raw_r;
  std::filesystem::path gaussian;
  std::filesystem::path report_json;
  std::filesystem::path report_csv;
};

ArtifactPaths artifact_paths(const PipelineConfig& cfg);

struct DatasetSplits {
  TrialSplit hhi;
  TrialSplit hri;
};

// `strict` turns a config-hash mismatch into HashMismatchError instead of a warning.
DatasetSplits load_splits(const PipelineConfig& cfg, bool strict);

struct LoadedModels {
  EmbeddingModel human;
  DynamicsModel dynamics;
  EmbeddingModel robot;
  RobotInteractionModel hme;
  RobotInteractionModel raw_hr;
  RobotInteractionModel raw_r;
  GaussianTrajectoryModel gaussian;

  BenchmarkModels view() const;
};

void log_run_header(const PipelineConfig& cfg, const std::string& stage);

void run_synth(const PipelineConfig& cfg);
TrainedEmbedding run_train_embedding(const PipelineConfig& cfg, AgentKind agent);
TrainedDynamics run_train_dynamics(const PipelineConfig& cfg);
TrainedRobotMapping run_train_robot(const PipelineConfig& cfg);
void run_train_baselines(const PipelineConfig& cfg);
LoadedModels load_all_models(const PipelineConfig& cfg, bool strict);
nlohmann::json run_eval(const PipelineConfig& cfg, bool force);

struct RolloutRequest {
  std::string trial_id;  // empty: first HRI test trial
  int prefix = 10;
  int horizon = 40;
};

// Robot and human predictions for one HRI test trial, plus the matching truth.
nlohmann::json run_rollout(const PipelineConfig& cfg, const RolloutRequest& req, bool force);

}  // namespace hme
