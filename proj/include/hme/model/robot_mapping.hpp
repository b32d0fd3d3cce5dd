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
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hme/model/dynamics.hpp"
#include "hme/model/embedding.hpp"

namespace hme {

// What the robot GRU sees next to the previous robot frame.
enum class RobotInput {
  kDynamics,  // extracted human task dynamics d_{t-1}
  kRawHuman,  // previous human frame x^s_{t-1}
  kRobotOnly  // nothing
};

std::string_view model_kind(RobotInput input);
RobotInput robot_input_from_kind(std::string_view kind);

struct RobotMappingConfig {
  RobotInput input = RobotInput::kDynamics;
  int state_dim = 32;
  std::vector<int> head_hidden = {32};
  Activation activation = Activation::kTanh;
  int epochs = 20;
  int batch_trials = 8;
  int tbptt = 64;
  double learning_rate = 1e-3;
  double grad_clip = 5.0;
  // Ablation: feed zeros instead of the extracted dynamics.
  bool zero_dynamics = false;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const RobotMappingConfig& c);
RobotMappingConfig robot_mapping_config_from_json(const nlohmann::json& j);

struct RobotInteractionModel {
  RobotMappingConfig config;
  Eigen::Index robot_dims = kRobotDims;
  Eigen::Index aux_dim = 0;
  int latent_dim = 0;
  Gru gru;
  GaussianHead latent_head;

  int state_dim() const { return config.state_dim; }
  Eigen::Index input_dim() const { return robot_dims + aux_dim; }
};

RobotInteractionModel make_robot_mapping(const RobotMappingConfig& config, Eigen::Index aux_dim,
                                         int latent_dim);
std::vector<ParamTensor*> params_of(RobotInteractionModel& m);

struct RobotStep {
  Mat h;
  GaussianBatch z;
};

// Row-batched: h' = GRU(h, [x_r_prev, aux_prev]), z ~ p(z | h').
RobotStep robot_advance(const RobotInteractionModel& m, const Mat& h, const Mat& x_r_prev,
                        const Mat& aux_prev);
GaussianBatch robot_latent(const RobotInteractionModel& m, const Mat& h);

// Frozen models the mapping is trained against.
struct RobotContext {
  const EmbeddingModel* robot = nullptr;
  const EmbeddingModel* human = nullptr;      // kDynamics, kRawHuman
  const DynamicsModel* dynamics = nullptr;    // kDynamics
};

// Aux inputs for every frame of a trial (T x aux_dim) from raw human frames.
Mat robot_aux_sequence(const RobotInteractionModel& m, const RobotContext& ctx,
                       const Mat& human_frames);

// One agent per row; inputs are [robot_{t-1}, aux_{t-1}], targets the robot window posterior.
SequenceBatch make_robot_batch(const RobotInteractionModel& m, const RobotContext& ctx,
                               const std::vector<const InteractionTrial*>& trials);

namespace ad {

struct RobotLoss {
  Var kl_sum;
  Var h_end;
  double valid_steps = 0.0;
};

RobotLoss robot_loss(Tape& tape, const RobotInteractionModel& m, const SequenceBatch& batch,
                     std::size_t first, std::size_t count, Var h0);

}  // namespace ad

struct TrainedRobotMapping {
  RobotInteractionModel model;
  std::vector<double> loss_trace;  // per-epoch mean KL per step
  std::int64_t rows_per_epoch = 0;
};

TrainedRobotMapping train_robot_mapping(const std::vector<InteractionTrial>& hri_trials,
                                        const RobotContext& ctx, const RobotMappingConfig& config);

// Mean KL per step on `trials`.
double evaluate_robot_mapping(const RobotInteractionModel& m, const RobotContext& ctx,
                              const std::vector<InteractionTrial>& trials);

// Teacher-forced robot latent means (T x latent_dim), row t from h^r_t.
Mat robot_latent_means(const RobotInteractionModel& m, const RobotContext& ctx,
                       const InteractionTrial& trial);

Checkpoint to_checkpoint(const RobotInteractionModel& m, const std::string& config_hash);
RobotInteractionModel robot_mapping_from_checkpoint(const Checkpoint& ckpt);

}  // namespace hme
