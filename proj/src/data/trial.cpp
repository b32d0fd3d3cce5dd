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

#include "hme/data/trial.hpp"

#include <numbers>

#include "hme/errors.hpp"

namespace hme {

std::string_view to_string(AgentKind k) { return k == AgentKind::kHuman ? "human" : "robot"; }

std::string_view to_string(Action a) {
  switch (a) {
    case Action::kHandShake:
      return "hand_shake";
    case Action::kHandWave:
      return "hand_wave";
    case Action::kParachute:
      return "parachute";
    case Action::kRocket:
      return "rocket";
  }
  return "hand_shake";
}

std::string_view to_string(PairType p) { return p == PairType::kHHI ? "HHI" : "HRI"; }
std::string_view to_string(LeaderRole r) { return r == LeaderRole::kA1 ? "a1" : "a2"; }

AgentKind agent_kind_from_string(std::string_view s) {
  if (s == "human") return AgentKind::kHuman;
  if (s == "robot") return AgentKind::kRobot;
  throw ContractError("unknown agent kind '" + std::string(s) + "'");
}

Action action_from_string(std::string_view s) {
  for (Action a : kAllActions)
    if (to_string(a) == s) return a;
  throw ContractError("unknown action '" + std::string(s) + "'");
}

PairType pair_type_from_string(std::string_view s) {
  if (s == "HHI") return PairType::kHHI;
  if (s == "HRI") return PairType::kHRI;
  throw ContractError("unknown pair type '" + std::string(s) + "'");
}

LeaderRole leader_from_string(std::string_view s) {
  if (s == "a1") return LeaderRole::kA1;
  if (s == "a2") return LeaderRole::kA2;
  throw ContractError("unknown leader role '" + std::string(s) + "'");
}

void validate(const AgentStream& s) {
  require(s.length() >= 1, "agent stream must have at least one frame");
  require(s.dims() >= 1, "agent stream must have at least one dimension");
  require(s.rate_hz > 0.0, "agent stream rate must be positive");
  require(s.frames.allFinite(), "agent stream contains non-finite values");
  if (s.kind == AgentKind::kRobot) {
    require(s.dims() == kRobotDims, "robot stream must have 7 joint angles");
    require(s.frames.cwiseAbs().maxCoeff() <= std::numbers::pi,
            "robot joint angles must lie within [-pi, pi]");
  }
}

void validate(const InteractionTrial& t) {
  validate(t.a1);
  validate(t.a2);
  require(t.a1.length() == t.a2.length(), "trial " + t.trial_id + ": agents differ in length");
  require(t.a1.kind == AgentKind::kHuman, "trial " + t.trial_id + ": a1 must be human");
  if (t.pair_type == PairType::kHRI) {
    require(t.a2.kind == AgentKind::kRobot, "trial " + t.trial_id + ": HRI a2 must be robot");
  } else {
    require(t.a2.kind == AgentKind::kHuman, "trial " + t.trial_id + ": HHI a2 must be human");
    require(t.a1.dims() == t.a2.dims(), "trial " + t.trial_id + ": human dims differ");
  }
}

std::vector<InteractionTrial> filter_by_pair(const std::vector<InteractionTrial>& trials,
                                             PairType pair) {
  std::vector<InteractionTrial> out;
  for (const auto& t : trials)
    if (t.pair_type == pair) out.push_back(t);
  return out;
}

std::vector<InteractionTrial> filter_by_action(const std::vector<InteractionTrial>& trials,
                                               Action action) {
  std::vector<InteractionTrial> out;
  for (const auto& t : trials)
    if (t.action == action) out.push_back(t);
  return out;
}

}  // namespace hme
