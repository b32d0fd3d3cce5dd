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

#include "hme/gen/generation.hpp"

#include <algorithm>
#include <numbers>

#include "hme/data/embodiment.hpp"
#include "hme/data/skeleton.hpp"
#include "hme/errors.hpp"

namespace hme {
namespace {

// Every path normalizes and decodes one row at a time so batch and online agree bitwise.
RowVec norm_row(const Normalizer& n, const RowVec& x) { return apply(n, Mat(x)).row(0); }

RowVec latent_point(const GaussianBatch& g, bool sample, Rng& rng) {
  if (!sample) return g.mean.row(0);
  const Mat eps = standard_normal(1, g.mean.cols(), rng);
  return g.mean.row(0).array() + (0.5 * g.log_var.row(0).array()).exp() * eps.row(0).array();
}

// Decoded window in normalized units, w x dims.
Mat decode_window(const EmbeddingModel& emb, const RowVec& z) {
  return unflatten_window(decode(emb, Mat(z)).mean.row(0), emb.dims);
}

Mat human_window(const DynamicsModel& dyn, const EmbeddingModel& emb, const Mat& h, bool sample,
                 Rng& rng) {
  const RowVec d = latent_point(dynamics_dist(dyn, h), sample, rng);
  return decode_window(emb, latent_point(latent_from_dynamics(dyn, Mat(d)), sample, rng));
}

Mat robot_window_phys(const RobotInteractionModel& map, const EmbeddingModel& emb, const Mat& h,
                      bool sample, Rng& rng) {
  const Mat w = invert(emb.normalizer, decode_window(emb, latent_point(robot_latent(map, h), sample, rng)));
  return w.cwiseMax(-std::numbers::pi).cwiseMin(std::numbers::pi);
}

bool uses_dynamics(const GenerationModels& m) {
  return m.mapping->config.input == RobotInput::kDynamics;
}

bool uses_human(const GenerationModels& m) {
  return m.mapping->config.input != RobotInput::kRobotOnly;
}

void check_models(const GenerationModels& m) {
  require(m.robot != nullptr && m.mapping != nullptr, "generation: robot models missing");
  require(!uses_human(m) || m.human != nullptr, "generation: human embedding missing");
  require(!uses_dynamics(m) || m.dynamics != nullptr, "generation: dynamics model missing");
}

// One time step t -> t+1 of the coupled recurrences. `x` is the human frame at t
// (normalized), `r` the robot frame at t (radians).
void joint_step(const GenerationModels& m, Mat& h_human, Mat& h_robot, const RowVec& x,
                const RowVec& r) {
  Mat aux(1, m.mapping->aux_dim);
  switch (m.mapping->config.input) {
    case RobotInput::kDynamics:
      if (m.mapping->config.zero_dynamics)
        aux.setZero();
      else
        aux = dynamics_dist(*m.dynamics, h_human).mean;
      break;
    case RobotInput::kRawHuman:
      aux = x;
      break;
    case RobotInput::kRobotOnly:
      break;
  }
  h_robot = robot_advance(*m.mapping, h_robot, Mat(norm_row(m.robot->normalizer, r)), aux).h;
  if (uses_dynamics(m)) h_human = advance(*m.dynamics, h_human, Mat(x)).h;
}

int stride_of(const RolloutOptions& opts, int w) {
  require(opts.stride >= 0 && opts.stride <= w, "rollout: stride must lie in [0, window]");
  return opts.stride == 0 ? w : opts.stride;
}

}  // namespace

Mat rollout_human(const DynamicsModel& dynamics, const EmbeddingModel& embedding,
                  const Mat& observed_prefix, Eigen::Index horizon, const RolloutOptions& opts) {
  require(observed_prefix.rows() >= 1, "rollout_human: prefix must have at least one frame");
  require(horizon >= 1, "rollout_human: horizon must be positive");
  require(observed_prefix.cols() == embedding.dims, "rollout_human: prefix dims mismatch");
  const int w = embedding.window();
  const int stride = stride_of(opts, w);
  Rng rng(opts.seed);
  Mat h = Mat::Zero(1, dynamics.state_dim());
  for (Eigen::Index t = 0; t < observed_prefix.rows(); ++t)
    h = advance(dynamics, h, Mat(norm_row(embedding.normalizer, observed_prefix.row(t)))).h;
  Mat out(horizon, embedding.dims);
  Eigen::Index emitted = 0;
  while (emitted < horizon) {
    const Mat win = human_window(dynamics, embedding, h, opts.sample, rng);
    const Eigen::Index k = std::min<Eigen::Index>(stride, horizon - emitted);
    out.middleRows(emitted, k) = invert(embedding.normalizer, win.topRows(k));
    emitted += k;
    if (emitted < horizon)
      for (Eigen::Index i = 0; i < k; ++i) h = advance(dynamics, h, Mat(win.row(i))).h;
  }
  return out;
}

Mat rollout_robot(const GenerationModels& models, const Mat& human_prefix, const Mat& robot_prefix,
                  Eigen::Index horizon, const RolloutOptions& opts) {
  check_models(models);
  require(horizon >= 1, "rollout_robot: horizon must be positive");
  require(robot_prefix.rows() >= 1 && robot_prefix.cols() == kRobotDims,
          "rollout_robot: robot prefix must be n x 7 with n >= 1");
  const bool human = uses_human(models);
  if (human)
    require(human_prefix.rows() == robot_prefix.rows() && human_prefix.cols() == models.human->dims,
            "rollout_robot: prefixes must be time-aligned with matching dims");
  const int w = models.robot->window();
  const int stride = stride_of(opts, w);
  Rng rng(opts.seed);
  Mat hs = Mat::Zero(1, uses_dynamics(models) ? models.dynamics->state_dim() : 0);
  Mat hr = Mat::Zero(1, models.mapping->state_dim());
  RowVec x = RowVec::Zero(human ? models.human->dims : 0);
  for (Eigen::Index t = 0; t < robot_prefix.rows(); ++t) {
    if (human) x = norm_row(models.human->normalizer, human_prefix.row(t));
    joint_step(models, hs, hr, x, robot_prefix.row(t));
  }
  Mat out(horizon, kRobotDims);
  Eigen::Index emitted = 0;
  while (emitted < horizon) {
    const Mat rw = robot_window_phys(*models.mapping, *models.robot, hr, opts.sample, rng);
    Mat hw;
    if (uses_dynamics(models)) hw = human_window(*models.dynamics, *models.human, hs, opts.sample, rng);
    const Eigen::Index k = std::min<Eigen::Index>(stride, horizon - emitted);
    out.middleRows(emitted, k) = rw.topRows(k);
    emitted += k;
    if (emitted >= horizon) break;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (uses_dynamics(models)) x = hw.row(i);
      joint_step(models, hs, hr, x, rw.row(i));
    }
  }
  return out;
}

RowVec rest_robot_frame() {
  const Mat rest = rest_pose();
  Mat full(1, rest.size());
  for (Eigen::Index j = 0; j < rest.rows(); ++j) full.block(0, 3 * j, 1, 3) = rest.row(j);
  return embodiment_map(full).row(0);
}

RolloutState make_rollout_state(const GenerationModels& models, const RowVec& initial_robot_frame,
                                int refresh_every, const RolloutOptions& opts) {
  check_models(models);
  require(refresh_every >= 1, "online: refresh_every must be positive");
  require(initial_robot_frame.size() == kRobotDims && initial_robot_frame.allFinite(),
          "online: initial robot frame must have 7 finite angles");
  RolloutState s;
  s.h_human = Mat::Zero(1, uses_dynamics(models) ? models.dynamics->state_dim() : 0);
  s.h_robot = Mat::Zero(1, models.mapping->state_dim());
  s.last_human = RowVec::Zero(uses_human(models) ? models.human->dims : 0);
  s.last_robot = initial_robot_frame.cwiseMax(-std::numbers::pi).cwiseMin(std::numbers::pi);
  s.refresh_every = refresh_every;
  s.sample = opts.sample;
  s.rng.seed(opts.seed);
  return s;
}

OnlineOutput online_step(RolloutState& state, const GenerationModels& models,
                         const RowVec& human_frame) {
  check_models(models);
  const Eigen::Index dims = uses_human(models) ? models.human->dims : human_frame.size();
  require(human_frame.size() == dims, "online: human frame has " +
                                          std::to_string(human_frame.size()) + " values, expected " +
                                          std::to_string(dims));
  require(human_frame.allFinite(), "online: human frame contains non-finite values");

  if (uses_human(models)) state.last_human = norm_row(models.human->normalizer, human_frame);
  joint_step(models, state.h_human, state.h_robot, state.last_human, state.last_robot);
  ++state.steps;

  OnlineOutput out;
  const int w = models.robot->window();
  if (!state.has_window || state.steps % state.refresh_every == 0 || state.cursor >= w) {
    state.robot_window = robot_window_phys(*models.mapping, *models.robot, state.h_robot, state.sample, state.rng);
    if (uses_dynamics(models))
      state.human_window = invert(models.human->normalizer,
                                  human_window(*models.dynamics, *models.human, state.h_human,
                                               state.sample, state.rng));
    state.cursor = 0;
    state.has_window = true;
    out.refreshed = true;
  }
  state.last_robot = state.robot_window.row(state.cursor++);
  out.command = state.last_robot;
  return out;
}

}  // namespace hme
