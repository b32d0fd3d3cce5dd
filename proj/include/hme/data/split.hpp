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
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hme/data/trial.hpp"

namespace hme {

struct TrialSplit {
  std::vector<InteractionTrial> train;
  std::vector<InteractionTrial> test;
};

// Stratified by action; whole trials only.
TrialSplit split_trials(const std::vector<InteractionTrial>& trials, double test_fraction,
                        std::uint64_t seed);

struct SplitManifest {
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

SplitManifest manifest_of(const TrialSplit& split, double test_fraction, std::uint64_t seed);
nlohmann::json manifest_to_json(const SplitManifest& m);
SplitManifest manifest_from_json(const nlohmann::json& j);

}  // namespace hme
