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

#include "hme/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <numbers>

#include "hme/data/embodiment.hpp"
#include "hme/data/preprocess.hpp"
#include "hme/errors.hpp"

namespace hme {

namespace {

constexpr double kPrePostMin = 0.1;
constexpr double kPrePostMax = 0.3;
constexpr double kFollowerDelayMin = 0.2;
constexpr double kFollowerDelayMax = 0.4;
constexpr double kEqualDelayMax = 0.3;
constexpr double kMinOscillation = 0.5;
constexpr double kLean = 0.04;
constexpr double kGainDepthMin = 0.2;
constexpr double kGainDepthMax = 0.5;
constexpr int kGainLobesMin = 2;
constexpr int kGainLobesMax = 4;

// Per-joint direction of the torso lean toward the reaching arm (forward, right, down).
const Mat kLeanShape = [] {
  Mat m = Mat::Zero(joint::kCount, 3);
  for (int j = joint::kSpine; j <= joint::kLHand; ++j) {
    const double height = rest_pose()(j, 2);
    const double up = std::max(0.3, (height + 0.2) / 0.8);
    m.row(j) << 0.6 * up, -0.35 * up, -0.3;
  }
  return m;
}();
constexpr std::uint64_t kHriSeedOffset = 1u << 20;

const std::array<Gesture, 4> kGestures = {{
    // hand_shake: forward and low, vertical pumping
    {{0.42, 0.06, -0.22}, {0.0, 0.0, 1.0}, 0.06, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}},
    // hand_wave: raised beside the head, side to side
    {{0.12, -0.10, 0.38}, {0.0, 1.0, 0.0}, 0.12, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}},
    // parachute: start high, flutter sideways while sinking to hip height
    {{0.38, 0.05, 0.22}, {0.0, 1.0, 0.0}, 0.05, {0.0, 0.0, -0.55}, {0.0, 0.0, -0.05}},
    // rocket: start low, wiggle while rising to shoulder height
    {{0.36, 0.05, -0.30}, {0.0, 1.0, 0.0}, 0.03, {0.0, 0.0, 0.30}, {0.0, 0.0, -0.05}},
}};

const Vec3 kRestWrist(0.03, -0.02, -0.55);

double min_jerk(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

ActionSynthConfig make_action(int trials, double dmin, double dmax, double ramp, double fmin,
                              double fmax) {
  ActionSynthConfig c;
  c.trials = trials;
  c.duration_min = dmin;
  c.duration_max = dmax;
  c.onset_ramp = ramp;
  c.offset_ramp = ramp;
  c.freq_min = fmin;
  c.freq_max = fmax;
  return c;
}

bool has_leader(Action a, PairType pair) {
  return pair == PairType::kHRI || a == Action::kParachute || a == Action::kRocket;
}

bool is_follower(const TrialPlan& p, int agent) {
  return p.leader && ((*p.leader == LeaderRole::kA1) ? agent == 1 : agent == 0);
}

// Reach progress in [0, 1] and drift progress in [0, 1] for one agent.
struct Progress {
  double reach;
  double drift;
  double envelope;
  double gain;
};

Progress progress(const TrialPlan& p, int agent, double t) {
  const AgentPlan& a = p.agents[static_cast<std::size_t>(agent)];
  Progress g{};
  if (t < a.retract_start) {
    g.reach = min_jerk((t - a.reach_start) / p.onset_ramp);
  } else {
    g.reach = 1.0 - min_jerk((t - a.retract_start) / p.offset_ramp);
  }
  const double osc_len = p.osc_end - p.osc_start;
  const double u = t - (is_follower(p, agent) ? p.follow_lag : 0.0);
  g.drift = min_jerk((u - p.osc_start) / osc_len);
  const double taper = std::min(0.3, osc_len / 4.0);
  if (u > p.osc_start && u < p.osc_end)
    g.envelope = min_jerk(std::min(u - p.osc_start, p.osc_end - u) / taper);
  const double gain_phase = 2.0 * std::numbers::pi * p.gain_lobes * (u - p.osc_start) / osc_len;
  g.gain = 1.0 + p.gain_depth * std::sin(gain_phase + p.gain_offset);
  return g;
}

}  // namespace

const Gesture& gesture(Action a) { return kGestures[static_cast<std::size_t>(a)]; }
Vec3 rest_wrist_offset() { return kRestWrist; }

SynthConfig default_hhi_config() {
  SynthConfig c;
  c[Action::kHandShake] = make_action(38, 8.5, 12.5, 0.8, 0.1, 3.0);
  c[Action::kHandWave] = make_action(31, 8.5, 17.5, 0.8, 0.1, 3.0);
  c[Action::kParachute] = make_action(49, 7.0, 12.0, 0.8, 0.1, 3.0);
  c[Action::kRocket] = make_action(70, 3.0, 6.0, 0.4, 0.3, 8.0);
  return c;
}

SynthConfig default_hri_config() {
  SynthConfig c;
  c[Action::kHandShake] = make_action(10, 10.4, 14.5, 0.8, 0.1, 3.0);
  c[Action::kHandWave] = make_action(10, 12.7, 17.4, 0.8, 0.1, 3.0);
  c[Action::kParachute] = make_action(11, 11.0, 14.3, 0.8, 0.1, 3.0);
  c[Action::kRocket] = make_action(10, 11.1, 13.8, 0.8, 0.3, 8.0);
  return c;
}

void validate(const SynthConfig& cfg) {
  require(cfg.capture_rate_hz > 0.0, "synth: capture rate must be positive");
  joint_subset(cfg.joint_subset);
  for (Action a : kAllActions) {
    const ActionSynthConfig& c = cfg[a];
    const std::string name(to_string(a));
    require(c.trials >= 0, "synth." + name + ": trial count must be non-negative");
    require(c.duration_min > 0.0 && c.duration_min <= c.duration_max && c.duration_max <= 60.0,
            "synth." + name + ": duration range must satisfy 0 < min <= max <= 60 s");
    require(c.cycles_min >= 1 && c.cycles_min <= c.cycles_max,
            "synth." + name + ": invalid cycle range");
    require(c.freq_min > 0.0 && c.freq_min <= c.freq_max, "synth." + name + ": invalid frequency range");
    require(c.amplitude >= 0.0, "synth." + name + ": amplitude must be non-negative");
    require(c.phase_jitter >= 0.0, "synth." + name + ": phase jitter must be non-negative");
    require(c.noise_std >= 0.0, "synth." + name + ": noise std must be non-negative");
    require(c.onset_ramp > 0.0 && c.offset_ramp > 0.0, "synth." + name + ": ramps must be positive");
    const double overhead = c.onset_ramp + c.offset_ramp + 2.0 * kPrePostMax +
                            2.0 * kFollowerDelayMax + kMinOscillation;
    require(overhead <= c.duration_min,
            "synth." + name + ": infeasible, ramps and delays exceed the shortest duration");
  }
}

std::uint64_t trial_seed(std::uint64_t global_seed, PairType pair, std::size_t index) {
  return global_seed + (pair == PairType::kHRI ? kHriSeedOffset : 0) + index;
}

TrialPlan plan_trial(const ActionSynthConfig& c, Action action, PairType pair, Rng& rng) {
  TrialPlan p;
  p.action = action;
  p.onset_ramp = c.onset_ramp;
  p.offset_ramp = c.offset_ramp;
  p.amplitude = c.amplitude;
  p.noise_std = c.noise_std;
  if (has_leader(action, pair)) p.leader = LeaderRole::kA1;

  const double lo = std::ceil(c.duration_min * kCanonicalRateHz - 1e-9);
  const double hi = std::floor(c.duration_max * kCanonicalRateHz + 1e-9);
  const double frames = std::clamp(std::round(uniform(rng, c.duration_min, c.duration_max) *
                                              kCanonicalRateHz),
                                   lo, hi);
  p.duration = frames / kCanonicalRateHz;

  const double pre = uniform(rng, kPrePostMin, kPrePostMax);
  const double post = uniform(rng, kPrePostMin, kPrePostMax);
  std::array<double, 2> delay{};
  if (p.leader) {
    delay[1] = uniform(rng, kFollowerDelayMin, kFollowerDelayMax);
  } else {
    delay[0] = uniform(rng, 0.0, kEqualDelayMax);
    delay[1] = uniform(rng, 0.0, kEqualDelayMax);
  }
  const double lag = std::max(delay[0], delay[1]);
  p.osc_start = pre + lag + c.onset_ramp;
  const double osc_len = p.duration - pre - post - c.onset_ramp - c.offset_ramp - 2.0 * lag;
  require(osc_len >= kMinOscillation, "synth: infeasible trial timing");
  p.osc_end = p.osc_start + osc_len;

  p.cycles = std::uniform_int_distribution<int>(c.cycles_min, c.cycles_max)(rng);
  p.freq = std::clamp(p.cycles / osc_len, c.freq_min, c.freq_max);
  const double phase0 = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double jitter = uniform(rng, -c.phase_jitter, c.phase_jitter);
  for (int k = 0; k < 2; ++k) {
    AgentPlan& a = p.agents[static_cast<std::size_t>(k)];
    a.reach_start = pre + delay[static_cast<std::size_t>(k)];
    a.retract_start = p.osc_end + delay[static_cast<std::size_t>(k)];
    a.phase = phase0 + (k == 1 ? jitter : 0.0);
  }
  p.gain_depth = uniform(rng, kGainDepthMin, kGainDepthMax);
  p.gain_lobes = std::uniform_int_distribution<int>(kGainLobesMin, kGainLobesMax)(rng);
  p.gain_offset = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  p.follow_lag = p.leader ? delay[1] : 0.0;
  return p;
}

Vec3 planned_wrist(const TrialPlan& p, int agent, double t) {
  const Gesture& g = gesture(p.action);
  const Progress s = progress(p, agent, t);
  Vec3 target = g.reach + (is_follower(p, agent) ? g.follower_offset : Vec3::Zero());
  Vec3 w = kRestWrist + p.amplitude * s.reach * (target - kRestWrist + s.drift * g.drift);
  const double phase = p.agents[static_cast<std::size_t>(agent)].phase +
                       2.0 * std::numbers::pi * p.freq * (t - p.osc_start);
  w += p.amplitude * s.envelope * s.gain * g.osc_amp * std::sin(phase) * g.osc_axis;
  return w;
}

Mat render_agent(const TrialPlan& p, int agent, double rate_hz, Rng& rng) {
  const Mat rest = rest_pose();
  const auto n = static_cast<Eigen::Index>(std::ceil(p.duration * rate_hz - 1e-9)) + 1;
  Mat out(n, 3 * joint::kCount);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    const double lean = kLean * p.amplitude * progress(p, agent, t).reach;
    Mat pose = rest;
    for (int j = joint::kSpine; j <= joint::kLHand; ++j) {
      if (j >= joint::kRElbow && j <= joint::kRHand) continue;
      pose.row(j) += lean * kLeanShape.row(j);
    }
    const Vec3 shoulder = pose.row(joint::kRShoulder).transpose();
    const ArmPose arm = solve_right_arm(shoulder, shoulder + planned_wrist(p, agent, t));
    pose.row(joint::kRElbow) = arm.elbow.transpose();
    pose.row(joint::kRWrist) = arm.wrist.transpose();
    pose.row(joint::kRHand) = arm.hand.transpose();
    for (int j = 0; j < joint::kCount; ++j)
      for (int k = 0; k < 3; ++k)
        out(i, 3 * j + k) = pose(j, k) + (j == joint::kHips ? 0.0 : p.noise_std * normal(rng));
  }
  return out;
}

namespace {

Mat to_canonical(const Mat& captured, double capture_rate, double duration) {
  AgentStream s{AgentKind::kHuman, captured, capture_rate};
  AgentStream r = resample(s, kCanonicalRateHz);
  const auto frames = static_cast<Eigen::Index>(std::llround(duration * kCanonicalRateHz)) + 1;
  require(r.frames.rows() >= frames, "synth: resampled stream too short");
  return r.frames.topRows(frames);
}

std::string make_id(PairType pair, Action a, int index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-%s-%03d", pair == PairType::kHHI ? "hhi" : "hri",
                std::string(to_string(a)).c_str(), index);
  return buf;
}

std::vector<InteractionTrial> generate(const SynthConfig& cfg, PairType pair) {
  validate(cfg);
  const std::vector<int> subset = joint_subset(cfg.joint_subset);
  std::vector<InteractionTrial> out;
  std::size_t index = 0;
  for (Action a : kAllActions) {
    for (int k = 0; k < cfg[a].trials; ++k, ++index) {
      Rng rng(trial_seed(cfg.seed, pair, index));
      const TrialPlan plan = plan_trial(cfg[a], a, pair, rng);
      const Mat full1 = to_canonical(render_agent(plan, 0, cfg.capture_rate_hz, rng),
                                     cfg.capture_rate_hz, plan.duration);
      const Mat full2 = to_canonical(render_agent(plan, 1, cfg.capture_rate_hz, rng),
                                     cfg.capture_rate_hz, plan.duration);
      InteractionTrial t;
      t.trial_id = make_id(pair, a, k);
      t.action = a;
      t.pair_type = pair;
      t.leader = plan.leader;
      t.a1 = AgentStream{AgentKind::kHuman, select_joints(full1, subset), kCanonicalRateHz};
      if (pair == PairType::kHHI) {
        t.a2 = AgentStream{AgentKind::kHuman, select_joints(full2, subset), kCanonicalRateHz};
      } else {
        t.a2 = AgentStream{AgentKind::kRobot, embodiment_map(full2), kCanonicalRateHz};
      }
      validate(t);
      out.push_back(std::move(t));
    }
  }
  return out;
}

}  // namespace

std::vector<InteractionTrial> synth_generate_hhi(const SynthConfig& cfg) {
  return generate(cfg, PairType::kHHI);
}

std::vector<InteractionTrial> synth_generate_hri(const SynthConfig& cfg) {
  return generate(cfg, PairType::kHRI);
}

Mat lift_hand_xy(Action action, double x, double y) {
  const Gesture& g = gesture(action);
  const Mat rest = rest_pose();
  const Vec3 shoulder = rest.row(joint::kRShoulder).transpose();
  const Vec3 wrist = shoulder + kRestWrist + x * (g.reach - kRestWrist) +
                     (y - 0.5) * 2.0 * kLiftSpan * g.osc_axis;
  Mat pose = rest;
  const ArmPose arm = solve_right_arm(shoulder, wrist);
  pose.row(joint::kRElbow) = arm.elbow.transpose();
  pose.row(joint::kRWrist) = arm.wrist.transpose();
  pose.row(joint::kRHand) = arm.hand.transpose();
  Mat frame(1, 3 * joint::kCount);
  for (int j = 0; j < joint::kCount; ++j) frame.block(0, 3 * j, 1, 3) = pose.row(j);
  return frame;
}

std::array<double, 2> project_hand_xy(Action action, const Vec3& wrist_rel_shoulder) {
  const Gesture& g = gesture(action);
  Eigen::Matrix<double, 3, 2> basis;
  basis.col(0) = g.reach - kRestWrist;
  basis.col(1) = 2.0 * kLiftSpan * g.osc_axis;
  const Eigen::Vector2d c =
      basis.colPivHouseholderQr().solve(Vec3(wrist_rel_shoulder - kRestWrist));
  return {c(0), c(1) + 0.5};
}

namespace {

nlohmann::json action_to_json(const ActionSynthConfig& c) {
  return {{"trials", c.trials},           {"duration_min", c.duration_min},
          {"duration_max", c.duration_max}, {"cycles_min", c.cycles_min},
          {"cycles_max", c.cycles_max},   {"freq_min", c.freq_min},
          {"freq_max", c.freq_max},       {"amplitude", c.amplitude},
          {"phase_jitter", c.phase_jitter}, {"onset_ramp", c.onset_ramp},
          {"offset_ramp", c.offset_ramp}, {"noise_std", c.noise_std}};
}

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

nlohmann::json synth_config_to_json(const SynthConfig& cfg) {
  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["capture_rate_hz"] = cfg.capture_rate_hz;
  j["joint_subset"] = cfg.joint_subset;
  for (Action a : kAllActions) j["actions"][std::string(to_string(a))] = action_to_json(cfg[a]);
  return j;
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig cfg;
  read_opt(j, "seed", cfg.seed);
  read_opt(j, "capture_rate_hz", cfg.capture_rate_hz);
  read_opt(j, "joint_subset", cfg.joint_subset);
  if (j.contains("actions")) {
    for (Action a : kAllActions) {
      const std::string name(to_string(a));
      if (!j["actions"].contains(name)) continue;
      const auto& o = j["actions"][name];
      ActionSynthConfig& c = cfg[a];
      read_opt(o, "trials", c.trials);
      read_opt(o, "duration_min", c.duration_min);
      read_opt(o, "duration_max", c.duration_max);
      read_opt(o, "cycles_min", c.cycles_min);
      read_opt(o, "cycles_max", c.cycles_max);
      read_opt(o, "freq_min", c.freq_min);
      read_opt(o, "freq_max", c.freq_max);
      read_opt(o, "amplitude", c.amplitude);
      read_opt(o, "phase_jitter", c.phase_jitter);
      read_opt(o, "onset_ramp", c.onset_ramp);
      read_opt(o, "offset_ramp", c.offset_ramp);
      read_opt(o, "noise_std", c.noise_std);
    }
  }
  return cfg;
}

}  // namespace hme
