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
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hme/eval/factor.hpp"
#include "hme/eval/metrics.hpp"
#include "hme/gen/generation.hpp"
#include "hme/model/baselines.hpp"

namespace hme {

struct BenchmarkModels {
  const EmbeddingModel* human = nullptr;
  const DynamicsModel* dynamics = nullptr;
  const EmbeddingModel* robot = nullptr;
  const RobotInteractionModel* hme = nullptr;
  const RobotInteractionModel* raw_hr = nullptr;
  const RobotInteractionModel* raw_r = nullptr;
  const GaussianTrajectoryModel* gaussian = nullptr;
};

struct BenchmarkConfig {
  int observe = 10;  // first anchor; frames before it are never scored
  int block = 40;    // frames predicted from each anchor
  int stride = 10;   // frames emitted per decoded window inside a block
  int human_anchor_stride = 10;
  std::uint64_t seed = 0;
  EntrainmentConfig entrainment;
};

inline const std::vector<std::string> kBenchmarkMethods = {"HME", "Raw HR", "Raw R", "Gaussian"};

// Robot predictions for frames [observe, T): at anchors observe, observe + block, ... the
// true prefix is observed and `block` frames are rolled out.
Mat benchmark_rollout(const GenerationModels& models, const InteractionTrial& trial,
                      const BenchmarkConfig& cfg);

// Gaussian sample padded with its last frame or truncated to `length`.
Mat gaussian_prediction(const GaussianTrajectoryModel& m, Action action, Eigen::Index length,
                        std::uint64_t seed);

// Single decoded window from every anchor a = k * anchor_stride (a >= anchor_stride,
// a + w <= T) of every human stream, compared in meters.
HorizonCurve human_mspe(const DynamicsModel& dynamics, const EmbeddingModel& embedding,
                        const std::vector<InteractionTrial>& trials, int anchor_stride = 10);

nlohmann::json benchmark(const BenchmarkModels& models, const std::vector<InteractionTrial>& hri_test,
                         const std::vector<InteractionTrial>& hhi_test, const BenchmarkConfig& cfg,
                         const std::string& config_hash);

// One row per (method, quantity, index).
std::string benchmark_csv(const nlohmann::json& report);

// Throws FormatError naming the first missing or malformed field.
void validate_report(const nlohmann::json& report);

}  // namespace hme
