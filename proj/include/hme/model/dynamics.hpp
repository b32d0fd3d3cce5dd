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

#include "hme/model/embedding.hpp"
#include "hme/nn/layers.hpp"

namespace hme {

struct DynamicsConfig {
  int state_dim = 128;
  int d_dim = 16;
  std::vector<int> head_hidden = {32};
  Activation activation = Activation::kTanh;
  int epochs = 20;
  int batch_trials = 16;
  int tbptt = 64;
  double learning_rate = 1e-3;
  double jsd_weight = 1.0;
  int jsd_samples = 8;
  // false: KL(p(z|d) || q(z|x)) as written; true: KL(q || p).
  bool reverse_kl = false;
  double grad_clip = 5.0;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const DynamicsConfig& c);
DynamicsConfig dynamics_config_from_json(const nlohmann::json& j);

// Shared GRU over either partner's frames, p(d | h) and p(z | d).
struct DynamicsModel {
  DynamicsConfig config;
  Eigen::Index input_dim = 0;
  int latent_dim = 0;
  Gru gru;
  GaussianHead dynamics_head;
  GaussianHead latent_head;

  int state_dim() const { return config.state_dim; }
  int d_dim() const { return config.d_dim; }
};

DynamicsModel make_dynamics(const DynamicsConfig& config, Eigen::Index input_dim, int latent_dim);
std::vector<ParamTensor*> params_of(DynamicsModel& m);

struct DynamicsStep {
  Mat h;
  GaussianBatch d;
};

// Row-batched: h' = GRU(h, x_prev), d ~ p(d | h').
DynamicsStep advance(const DynamicsModel& m, const Mat& h, const Mat& x_prev);
GaussianBatch dynamics_dist(const DynamicsModel& m, const Mat& h);
GaussianBatch latent_from_dynamics(const DynamicsModel& m, const Mat& d);
GaussianParams latent_from_dynamics(const DynamicsModel& m, const Vec& d);

// Row t is the mean of p(d | h_t), h_0 = 0, h_t = GRU(h_{t-1}, x_{t-1}).
Mat extract_dynamics_means(const DynamicsModel& m, const Mat& normalized_frames);

// Time-major training batch. Rows are agent-major: agent a, trial i is row a * trials + i.
struct SequenceBatch {
  int agents = 1;
  Eigen::Index trials = 0;
  std::vector<Mat> inputs;      // per step: rows x input_dim, the frame before the target window
  std::vector<Mat> q_mean;      // per step: rows x latent_dim
  std::vector<Mat> q_log_var;
  std::vector<Mat> mask;        // per step: rows x 1, 1 where the step exists

  Eigen::Index rows() const { return agents * trials; }
  std::size_t steps() const { return inputs.size(); }
};

// Streams of each trial that feed the dynamics model: both humans for HHI, the human
// partner alone for HRI. All trials in one batch must contribute the same number.
SequenceBatch make_dynamics_batch(const std::vector<const InteractionTrial*>& trials,
                                  const EmbeddingModel& embedding);

struct DynamicsNoise {
  std::vector<Mat> d;          // per step: rows x d_dim
  std::vector<JsdNoise> jsd;   // per step, empty when agents == 1
};

DynamicsNoise make_dynamics_noise(const DynamicsModel& m, const SequenceBatch& batch,
                                  std::size_t first, std::size_t count, Rng& rng);

namespace ad {

struct DynamicsLoss {
  Var kl_sum;   // 1x1, masked sum over rows and steps
  Var jsd_sum;  // 1x1, masked sum over trials and steps (zero for one agent)
  Var h_end;
  double valid_steps = 0.0;  // number of (trial, step) pairs with a loss
};

DynamicsLoss dynamics_loss(Tape& tape, const DynamicsModel& m, const SequenceBatch& batch,
                           std::size_t first, std::size_t count, Var h0,
                           const DynamicsNoise& noise);

}  // namespace ad

struct TrainedDynamics {
  DynamicsModel model;
  std::vector<double> loss_trace;  // per-epoch mean of (KL terms + jsd_weight * JSD) per step
};

TrainedDynamics train_dynamics(const std::vector<InteractionTrial>& trials,
                               const EmbeddingModel& embedding, const DynamicsConfig& config);

struct DynamicsEval {
  double kl = 0.0;   // mean per (agent, step)
  double jsd = 0.0;  // mean per (trial, step)
};

// Loss terms on `trials` with a fixed noise seed, no parameter updates.
DynamicsEval evaluate_dynamics(const DynamicsModel& m, const std::vector<InteractionTrial>& trials,
                               const EmbeddingModel& embedding, std::uint64_t noise_seed);

Checkpoint to_checkpoint(const DynamicsModel& m, const std::string& config_hash);
DynamicsModel dynamics_from_checkpoint(const Checkpoint& ckpt);

}  // namespace hme
