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
#include <map>
#include <string>
#include <vector>

#include "hme/data/trial.hpp"
#include "hme/io/checkpoint.hpp"
#include "hme/model/robot_mapping.hpp"

namespace hme {

// Non-adaptive baseline: per action and robot joint, a full-covariance Gaussian over
// DTW-aligned training trajectories.
struct JointGaussian {
  Vec mean;     // T_DTW
  Mat aligned;  // n x T_DTW training trajectories after alignment
  Mat cov;      // T_DTW x T_DTW, ridge included
  double ridge = 0.0;
  Mat chol;     // lower Cholesky factor of cov
};

struct GaussianTrajectoryModel {
  std::map<Action, std::vector<JointGaussian>> per_action;  // 7 joints each

  Eigen::Index length(Action a) const;
};

GaussianTrajectoryModel fit_gaussian_baseline(const std::vector<InteractionTrial>& hri_train);

// Unbiased covariance of the rows of `aligned` plus eps*I, eps = 1e-6 * mean diagonal.
JointGaussian fit_joint_gaussian(const Mat& aligned);

// T_DTW x 7 draw, clamped to [-pi, pi]. Never looks at a human stream.
Mat sample_gaussian_baseline(const GaussianTrajectoryModel& m, Action action, std::uint64_t seed);
// Same draw from explicit standard-normal inputs (T_DTW x 7).
Mat sample_gaussian_baseline(const GaussianTrajectoryModel& m, Action action, const Mat& noise);

Checkpoint to_checkpoint(const GaussianTrajectoryModel& m, const std::string& config_hash);
GaussianTrajectoryModel gaussian_baseline_from_checkpoint(const Checkpoint& ckpt);

enum class RawVariant { kHR, kR };

// Robot mapping with the GRU input switched to [x^r, x^s] (HR) or [x^r] (R).
TrainedRobotMapping train_raw_variant(const std::vector<InteractionTrial>& hri_trials,
                                      const EmbeddingModel& robot, const EmbeddingModel& human,
                                      RawVariant variant, RobotMappingConfig config);

}  // namespace hme
