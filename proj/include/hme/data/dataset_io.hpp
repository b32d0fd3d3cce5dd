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

#include <filesystem>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hme/data/trial.hpp"

namespace hme {

// JSON Lines, one trial per line.
void save_dataset(const std::vector<InteractionTrial>& trials, const std::filesystem::path& path);
std::vector<InteractionTrial> load_dataset(const std::filesystem::path& path);

nlohmann::json trial_to_json(const InteractionTrial& t);
// `line` is only used for error messages.
InteractionTrial trial_from_json(const nlohmann::json& j, std::size_t line = 0);

nlohmann::json matrix_to_json(const Mat& m);
Mat matrix_from_json(const nlohmann::json& j, const char* field, std::size_t line = 0);

}  // namespace hme
