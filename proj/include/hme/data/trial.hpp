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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hme/nn/tensor.hpp"

namespace hme {

inline constexpr double kCanonicalRateHz = 40.0;
inline constexpr int kRobotDims = 7;

enum class AgentKind { kHuman, kRobot };
enum class Action { kHandShake, kHandWave, kParachute, kRocket };
enum class PairType { kHHI, kHRI };
enum class LeaderRole { kA1, kA2 };

inline constexpr std::array<Action, 4> kAllActions = {Action::kHandShake, Action::kHandWave,
                                                      Action::kParachute, Action::kRocket};

std::string_view to_string(AgentKind k);
std::string_view to_string(Action a);
std::string_view to_string(PairType p);
std::string_view to_string(LeaderRole r);

// Each throws ContractError on an unknown name.
AgentKind agent_kind_from_string(std::string_view s);
Action action_from_string(std::string_view s);
PairType pair_type_from_string(std::string_view s);
LeaderRole leader_from_string(std::string_view s);

// Frames are T x dims. Human frames are Cartesian meters, robot frames radians.
struct AgentStream {
  AgentKind kind = AgentKind::kHuman;
  Mat frames;
  double rate_hz = kCanonicalRateHz;

  Eigen::Index length() const { return frames.rows(); }
  Eigen::Index dims() const { return frames.cols(); }
};

struct InteractionTrial {
  std::string trial_id;
  Action action = Action::kHandShake;
  PairType pair_type = PairType::kHHI;
  AgentStream a1;
  AgentStream a2;
  std::optional<LeaderRole> leader;

  Eigen::Index length() const { return a1.length(); }
};

// Throws ContractError naming the first violated invariant.
void validate(const AgentStream& s);
void validate(const InteractionTrial& t);

std::vector<InteractionTrial> filter_by_pair(const std::vector<InteractionTrial>& trials,
                                             PairType pair);
std::vector<InteractionTrial> filter_by_action(const std::vector<InteractionTrial>& trials,
                                               Action action);

}  // namespace hme
