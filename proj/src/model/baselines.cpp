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

#include "hme/model/baselines.hpp"

#include <numbers>

#include <nlohmann/json.hpp>

#include "hme/data/dtw.hpp"
#include "hme/errors.hpp"

namespace hme {

Eigen::Index GaussianTrajectoryModel::length(Action a) const {
  const auto it = per_action.find(a);
  require(it != per_action.end(), "gaussian baseline: action '" + std::string(to_string(a)) +
                                      "' was not fitted");
  return it->second.front().mean.size();
}

JointGaussian fit_joint_gaussian(const Mat& aligned) {
  require(aligned.rows() >= 2, "gaussian baseline: need at least two trajectories");
  JointGaussian g;
  g.aligned = aligned;
  g.mean = aligned.colwise().mean().transpose();
  const Mat centered = aligned.rowwise() - g.mean.transpose();
  g.cov = (centered.transpose() * centered) / static_cast<double>(aligned.rows() - 1);
  const double mean_diag = g.cov.diagonal().mean();
  g.ridge = mean_diag > 0.0 ? 1e-6 * mean_diag : 1e-12;
  g.cov.diagonal().array() += g.ridge;
  const Eigen::LLT<Mat> llt(g.cov);
  if (llt.info() != Eigen::Success)
    throw NumericError("gaussian baseline: covariance is not positive definite");
  g.chol = llt.matrixL();
  return g;
}

GaussianTrajectoryModel fit_gaussian_baseline(const std::vector<InteractionTrial>& hri_train) {
  GaussianTrajectoryModel m;
  for (Action a : kAllActions) {
    std::vector<const InteractionTrial*> group;
    for (const auto& t : hri_train)
      if (t.action == a && t.pair_type == PairType::kHRI) group.push_back(&t);
    if (group.empty()) continue;
    require(group.size() >= 2, "gaussian baseline: action '" + std::string(to_string(a)) +
                                   "' has a single training trial; at least two are needed");
    std::vector<JointGaussian> joints;
    for (int j = 0; j < kRobotDims; ++j) {
      std::vector<Vec> seqs;
      for (const auto* t : group) seqs.push_back(t->a2.frames.col(j));
      const DtwAlignment al = dtw_align(seqs);
      Mat rows(static_cast<Eigen::Index>(al.aligned.size()), al.length);
      for (std::size_t i = 0; i < al.aligned.size(); ++i)
        rows.row(static_cast<Eigen::Index>(i)) = al.aligned[i].transpose();
      joints.push_back(fit_joint_gaussian(rows));
    }
    m.per_action.emplace(a, std::move(joints));
  }
  require(!m.per_action.empty(), "gaussian baseline: no HRI training trials");
  return m;
}

Mat sample_gaussian_baseline(const GaussianTrajectoryModel& m, Action action, const Mat& noise) {
  const Eigen::Index T = m.length(action);
  require(noise.rows() == T && noise.cols() == kRobotDims,
          "gaussian baseline: noise must be T_DTW x 7");
  const auto& joints = m.per_action.at(action);
  Mat out(T, kRobotDims);
  for (int j = 0; j < kRobotDims; ++j) {
    const JointGaussian& g = joints[static_cast<std::size_t>(j)];
    out.col(j) = g.mean + g.chol.triangularView<Eigen::Lower>() * noise.col(j);
  }
  return out.cwiseMax(-std::numbers::pi).cwiseMin(std::numbers::pi);
}

Mat sample_gaussian_baseline(const GaussianTrajectoryModel& m, Action action, std::uint64_t seed) {
  Rng rng(seed);
  return sample_gaussian_baseline(m, action, standard_normal(m.length(action), kRobotDims, rng));
}

Checkpoint to_checkpoint(const GaussianTrajectoryModel& m, const std::string& config_hash) {
  Checkpoint c;
  c.model_kind = "gaussian-baseline";
  c.config = nlohmann::json::object();
  c.config_hash = config_hash;
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& [a, joints] : m.per_action) {
    actions.push_back(to_string(a));
    for (std::size_t j = 0; j < joints.size(); ++j)
      c.tensors.push_back({"gaussian." + std::string(to_string(a)) + ".joint" + std::to_string(j) +
                               ".aligned",
                           joints[j].aligned});
  }
  c.extra = {{"actions", actions}};
  return c;
}

GaussianTrajectoryModel gaussian_baseline_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.model_kind != "gaussian-baseline")
    throw FormatError("expected a gaussian-baseline checkpoint, got '" + ckpt.model_kind + "'");
  GaussianTrajectoryModel m;
  try {
    for (const auto& name : ckpt.extra.at("actions")) {
      const Action a = action_from_string(name.get<std::string>());
      std::vector<JointGaussian> joints;
      for (int j = 0; j < kRobotDims; ++j)
        joints.push_back(fit_joint_gaussian(
            ckpt.tensor("gaussian." + name.get<std::string>() + ".joint" + std::to_string(j) + ".aligned")
                .value));
      m.per_action.emplace(a, std::move(joints));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("gaussian baseline checkpoint: ") + e.what());
  } catch (const ContractError& e) {
    throw FormatError(std::string("gaussian baseline checkpoint: ") + e.what());
  }
  return m;
}

TrainedRobotMapping train_raw_variant(const std::vector<InteractionTrial>& hri_trials,
                                      const EmbeddingModel& robot, const EmbeddingModel& human,
                                      RawVariant variant, RobotMappingConfig config) {
  config.input = variant == RawVariant::kHR ? RobotInput::kRawHuman : RobotInput::kRobotOnly;
  config.zero_dynamics = false;
  return train_robot_mapping(hri_trials, RobotContext{&robot, &human, nullptr}, config);
}

}  // namespace hme
