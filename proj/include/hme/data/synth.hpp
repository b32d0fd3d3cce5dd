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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hme/data/skeleton.hpp"
#include "hme/data/trial.hpp"

namespace hme {

struct ActionSynthConfig {
  int trials = 10;
  double duration_min = 8.0;  // s
  double duration_max = 12.0;
  int cycles_min = 3;
  int cycles_max = 6;
  double freq_min = 0.2;  // Hz
  double freq_max = 6.0;
  double amplitude = 1.0;
  double phase_jitter = 0.2;  // rad
  double onset_ramp = 0.8;    // s
  double offset_ramp = 0.8;
  double noise_std = 0.0005;  // m
};

struct SynthConfig {
  std::array<ActionSynthConfig, 4> actions;
  std::uint64_t seed = 0;
  double capture_rate_hz = 100.0;
  std::string joint_subset = "right_arm_torso";

  ActionSynthConfig& operator[](Action a) { return actions[static_cast<std::size_t>(a)]; }
  const ActionSynthConfig& operator[](Action a) const {
    return actions[static_cast<std::size_t>(a)];
  }
};

SynthConfig default_hhi_config();
SynthConfig default_hri_config();

// Throws ContractError, including when ramps leave no room for oscillation.
void validate(const SynthConfig& cfg);

nlohmann::json synth_config_to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j);

// Cartesian gesture shape, relative to the right shoulder.
struct Gesture {
  Vec3 reach;       // wrist target offset
  Vec3 osc_axis;    // unit
  double osc_amp;   // m
  Vec3 drift;       // displacement accumulated over the oscillation
  Vec3 follower_offset;
};

const Gesture& gesture(Action a);
Vec3 rest_wrist_offset();

struct AgentPlan {
  double reach_start = 0.0;
  double retract_start = 0.0;
  double phase = 0.0;
};

struct TrialPlan {
  Action action = Action::kHandShake;
  double duration = 0.0;  // s, a whole number of canonical frames
  double osc_start = 0.0;
  double osc_end = 0.0;
  int cycles = 3;
  double freq = 1.0;
  double onset_ramp = 0.0;
  double offset_ramp = 0.0;
  double amplitude = 1.0;
  double noise_std = 0.0;
  // Oscillation gain 1 + depth * sin(2 pi lobes s + offset), s the normalized
  // oscillation time; the follower sees it `follow_lag` seconds late.
  double gain_depth = 0.0;
  int gain_lobes = 2;
  double gain_offset = 0.0;
  double follow_lag = 0.0;
  std::optional<LeaderRole> leader;
  std::array<AgentPlan, 2> agents;
};

std::uint64_t trial_seed(std::uint64_t global_seed, PairType pair, std::size_t index);

TrialPlan plan_trial(const ActionSynthConfig& cfg, Action action, PairType pair, Rng& rng);

// Full-skeleton wrist path before observation noise, in the agent's own frame.
Vec3 planned_wrist(const TrialPlan& plan, int agent, double t);

// Full 19-joint frames at `rate_hz`, including noise drawn from `rng`.
Mat render_agent(const TrialPlan& plan, int agent, double rate_hz, Rng& rng);

std::vector<InteractionTrial> synth_generate_hhi(const SynthConfig& cfg);
std::vector<InteractionTrial> synth_generate_hri(const SynthConfig& cfg);

// Service-side lift of a 2-D hand position to a skeleton frame.
// x: progress from rest to the reach target; y: offset along the oscillation axis,
// (y - 0.5) * 2 * kLiftSpan meters.
inline constexpr double kLiftSpan = 0.15;
Mat lift_hand_xy(Action action, double x, double y);
std::array<double, 2> project_hand_xy(Action action, const Vec3& wrist_rel_shoulder);

}  // namespace hme
