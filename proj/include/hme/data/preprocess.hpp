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

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hme/data/trial.hpp"

namespace hme {

AgentStream resample(const AgentStream& stream, double target_hz);

struct WindowSpec {
  int w = 40;
  int stride = 1;
};

// Row i is the window starting at starts[i], flattened frame-major (w * dims).
struct WindowSet {
  std::vector<Eigen::Index> starts;
  Mat data;

  Eigen::Index count() const { return data.rows(); }
};

Eigen::Index window_count(Eigen::Index length, const WindowSpec& spec);
WindowSet extract_windows(const Mat& frames, const WindowSpec& spec);
inline WindowSet extract_windows(const AgentStream& s, const WindowSpec& spec) {
  return extract_windows(s.frames, spec);
}

// Flattened window -> w x dims frames, and back.
Mat unflatten_window(const RowVec& flat, Eigen::Index dims);
RowVec flatten_window(const Mat& frames);

struct Normalizer {
  AgentKind kind = AgentKind::kHuman;
  RowVec mean;
  RowVec std;
  RowVec min;
  RowVec max;

  Eigen::Index dims() const { return mean.size(); }
};

// Human: every human stream in the trials. Robot: every robot stream.
Normalizer fit_normalizer(const std::vector<InteractionTrial>& train, AgentKind kind);
Normalizer fit_normalizer(const std::vector<Mat>& streams, AgentKind kind);

Mat apply(const Normalizer& n, const Mat& frames);
Mat invert(const Normalizer& n, const Mat& frames);
// Applies to a flattened frame-major window of any whole number of frames.
RowVec apply_flat(const Normalizer& n, const RowVec& flat);
RowVec invert_flat(const Normalizer& n, const RowVec& flat);

nlohmann::json normalizer_to_json(const Normalizer& n);
Normalizer normalizer_from_json(const nlohmann::json& j);

}  // namespace hme
