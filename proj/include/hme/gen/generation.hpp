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

#include "hme/model/dynamics.hpp"
#include "hme/model/embedding.hpp"
#include "hme/model/robot_mapping.hpp"

namespace hme {

// Frozen models shared read-only by every rollout and session.
struct GenerationModels {
  const EmbeddingModel* human = nullptr;
  const DynamicsModel* dynamics = nullptr;
  const EmbeddingModel* robot = nullptr;
  const RobotInteractionModel* mapping = nullptr;
};

struct RolloutOptions {
  int stride = 0;       // frames emitted per decoded window; 0 means the full window
  bool sample = false;  // draw latents instead of using means
  std::uint64_t seed = 0;
};

// Frames in and out are in physical units (meters for humans, radians for the robot).
Mat rollout_human(const DynamicsModel& dynamics, const EmbeddingModel& embedding,
                  const Mat& observed_prefix, Eigen::Index horizon, const RolloutOptions& opts = {});

// Robot frames are clamped to [-pi, pi]. Raw HR variants hold the last observed
// human pose beyond the prefix; raw R variants ignore the human prefix.
Mat rollout_robot(const GenerationModels& models, const Mat& human_prefix, const Mat& robot_prefix,
                  Eigen::Index horizon, const RolloutOptions& opts = {});

// Robot command for the skeleton's rest pose.
RowVec rest_robot_frame();

struct RolloutState {
  Mat h_human;          // 1 x state
  Mat h_robot;          // 1 x state
  RowVec last_human;    // normalized, last observed
  RowVec last_robot;    // radians, last command
  Mat human_window;     // w x dims, meters
  Mat robot_window;     // w x 7, radians
  int cursor = 0;
  bool has_window = false;
  std::int64_t steps = 0;
  int refresh_every = 4;
  bool sample = false;
  Rng rng;
};

RolloutState make_rollout_state(const GenerationModels& models, const RowVec& initial_robot_frame,
                                int refresh_every = 4, const RolloutOptions& opts = {});

struct OnlineOutput {
  RowVec command;  // next robot frame, radians
  bool refreshed = false;
};

// Consumes one observed human frame. Throws ContractError on a bad frame and leaves
// `state` untouched. After n calls, a refresh yields the windows rollout_robot would
// predict from the n observed frames and the n robot frames sent so far.
OnlineOutput online_step(RolloutState& state, const GenerationModels& models,
                         const RowVec& human_frame);

}  // namespace hme
