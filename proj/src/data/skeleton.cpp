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

#include "hme/data/skeleton.hpp"

#include <algorithm>
#include <cmath>

#include "hme/errors.hpp"

namespace hme {

namespace {

constexpr std::array<std::string_view, joint::kCount> kNames = {
    "hips",    "spine",   "chest",   "neck",    "head",       "r_shoulder", "r_elbow",
    "r_wrist", "r_hand",  "l_shoulder", "l_elbow", "l_wrist", "l_hand",     "r_upleg",
    "r_knee",  "r_ankle", "l_upleg", "l_knee",  "l_ankle"};

constexpr double kRest[joint::kCount][3] = {
    {0.00, 0.00, 0.00},   {0.00, 0.00, 0.15},   {0.00, 0.00, 0.32},  {0.00, 0.00, 0.50},
    {0.01, 0.00, 0.62},   {0.00, -0.18, 0.46},  {0.02, -0.20, 0.16}, {0.03, -0.20, -0.09},
    {0.04, -0.20, -0.17}, {0.00, 0.18, 0.46},   {0.02, 0.20, 0.16},  {0.03, 0.20, -0.09},
    {0.04, 0.20, -0.17},  {0.00, -0.10, -0.05}, {0.02, -0.10, -0.50}, {0.00, -0.10, -0.92},
    {0.00, 0.10, -0.05},  {0.02, 0.10, -0.50},  {0.00, 0.10, -0.92}};

}  // namespace

std::string_view joint_name(int j) {
  require(j >= 0 && j < joint::kCount, "joint index out of range");
  return kNames[static_cast<std::size_t>(j)];
}

Mat rest_pose() {
  Mat m(joint::kCount, 3);
  for (int j = 0; j < joint::kCount; ++j)
    for (int k = 0; k < 3; ++k) m(j, k) = kRest[j][k];
  // Keep the resting arm consistent with the IK used during motion.
  const Vec3 shoulder = m.row(joint::kRShoulder).transpose();
  const ArmPose arm = solve_right_arm(shoulder, m.row(joint::kRWrist).transpose());
  m.row(joint::kRElbow) = arm.elbow.transpose();
  m.row(joint::kRWrist) = arm.wrist.transpose();
  m.row(joint::kRHand) = arm.hand.transpose();
  return m;
}

std::vector<int> joint_subset(std::string_view name) {
  if (name == "full") {
    std::vector<int> all(joint::kCount);
    for (int j = 0; j < joint::kCount; ++j) all[static_cast<std::size_t>(j)] = j;
    return all;
  }
  if (name == "right_arm_torso")
    return {joint::kHips,   joint::kSpine,  joint::kChest,  joint::kNeck,
            joint::kRShoulder, joint::kRElbow, joint::kRWrist, joint::kRHand};
  throw ContractError("unknown joint subset '" + std::string(name) + "'");
}

Mat select_joints(const Mat& full, std::span<const int> joints) {
  require(full.cols() == 3 * joint::kCount, "select_joints: expected full-skeleton frames");
  Mat out(full.rows(), 3 * static_cast<Eigen::Index>(joints.size()));
  for (std::size_t k = 0; k < joints.size(); ++k)
    out.middleCols(3 * static_cast<Eigen::Index>(k), 3) = full.middleCols(3 * joints[k], 3);
  return out;
}

Vec3 joint_position(const Mat& full_frames, Eigen::Index t, int j) {
  return full_frames.block(t, 3 * j, 1, 3).transpose();
}

void set_joint(Mat& full_frames, Eigen::Index t, int j, const Vec3& p) {
  full_frames.block(t, 3 * j, 1, 3) = p.transpose();
}

ArmPose solve_right_arm(const Vec3& shoulder, const Vec3& wrist_target) {
  const double lo = std::abs(kUpperArm - kForearm) + 1e-3;
  const double hi = kUpperArm + kForearm - 1e-3;
  Vec3 dir = wrist_target - shoulder;
  double d = dir.norm();
  dir = d > 1e-9 ? Vec3(dir / d) : Vec3(0.0, 0.0, -1.0);
  d = std::clamp(d, lo, hi);
  // Elbow swings down and out, away from the body.
  Vec3 pole(0.0, -0.3, -1.0);
  pole -= pole.dot(dir) * dir;
  if (pole.norm() < 1e-6) pole = Vec3(0.0, -1.0, 0.0) - dir.y() * dir;
  pole.normalize();
  const double a = (kUpperArm * kUpperArm - kForearm * kForearm + d * d) / (2.0 * d);
  const double b = std::sqrt(std::max(0.0, kUpperArm * kUpperArm - a * a));
  ArmPose p;
  p.wrist = shoulder + d * dir;
  p.elbow = shoulder + a * dir + b * pole;
  const Vec3 fore = (p.wrist - p.elbow).normalized();
  p.hand = p.wrist + kHandLength * fore;
  return p;
}

}  // namespace hme
