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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hme/nn/tensor.hpp"

namespace hme {

// Body-centric frame: origin at the pelvis, x forward, y left, z up, meters.
namespace joint {
enum : int {
  kHips,
  kSpine,
  kChest,
  kNeck,
  kHead,
  kRShoulder,
  kRElbow,
  kRWrist,
  kRHand,
  kLShoulder,
  kLElbow,
  kLWrist,
  kLHand,
  kRUpLeg,
  kRKnee,
  kRAnkle,
  kLUpLeg,
  kLKnee,
  kLAnkle,
  kCount
};
}  // namespace joint

inline constexpr double kUpperArm = 0.30;
inline constexpr double kForearm = 0.25;
inline constexpr double kHandLength = 0.08;

std::string_view joint_name(int j);

using Vec3 = Eigen::Vector3d;

// joint::kCount x 3.
Mat rest_pose();

// "full" (19 joints) or "right_arm_torso" (hips, spine, chest, neck, r_shoulder,
// r_elbow, r_wrist, r_hand).
std::vector<int> joint_subset(std::string_view name);

// Full-skeleton frames (T x 57) -> subset frames (T x 3|subset|).
Mat select_joints(const Mat& full, std::span<const int> joints);

Vec3 joint_position(const Mat& full_frames, Eigen::Index t, int j);
void set_joint(Mat& full_frames, Eigen::Index t, int j, const Vec3& p);

struct ArmPose {
  Vec3 elbow;
  Vec3 wrist;
  Vec3 hand;
};

// Two-link IK for the right arm; the wrist is pulled into reach when needed.
ArmPose solve_right_arm(const Vec3& shoulder, const Vec3& wrist_target);

}  // namespace hme
