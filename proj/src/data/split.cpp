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

#include "hme/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "hme/errors.hpp"

namespace hme {

TrialSplit split_trials(const std::vector<InteractionTrial>& trials, double test_fraction,
                        std::uint64_t seed) {
  require(test_fraction > 0.0 && test_fraction < 1.0, "split_trials: fraction must be in (0, 1)");
  Rng rng(seed);
  std::vector<bool> is_test(trials.size(), false);
  for (Action a : kAllActions) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < trials.size(); ++i)
      if (trials[i].action == a) idx.push_back(i);
    if (idx.empty()) continue;
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
    if (idx.size() >= 2) n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
    else n_test = 0;
    for (std::size_t k = 0; k < n_test; ++k) is_test[idx[k]] = true;
  }
  TrialSplit out;
  for (std::size_t i = 0; i < trials.size(); ++i)
    (is_test[i] ? out.test : out.train).push_back(trials[i]);
  return out;
}

SplitManifest manifest_of(const TrialSplit& split, double test_fraction, std::uint64_t seed) {
  SplitManifest m;
  m.seed = seed;
  m.test_fraction = test_fraction;
  for (const auto& t : split.train) m.train_ids.push_back(t.trial_id);
  for (const auto& t : split.test) m.test_ids.push_back(t.trial_id);
  return m;
}

nlohmann::json manifest_to_json(const SplitManifest& m) {
  return {{"seed", m.seed}, {"test_fraction", m.test_fraction}, {"train", m.train_ids},
          {"test", m.test_ids}};
}

SplitManifest manifest_from_json(const nlohmann::json& j) {
  SplitManifest m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    m.test_fraction = j.at("test_fraction").get<double>();
    m.train_ids = j.at("train").get<std::vector<std::string>>();
    m.test_ids = j.at("test").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("split manifest: ") + e.what());
  }
  return m;
}

}  // namespace hme
