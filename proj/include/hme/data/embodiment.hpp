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

#include "hme/data/skeleton.hpp"

namespace hme {

// Planar robot arm used by the embodiment map.
inline constexpr double kRobotLink1 = 0.30;
inline constexpr double kRobotLink2 = 0.25;
inline constexpr double kRobotLink3 = 0.15;

// Full-skeleton human frames (T x 57) -> robot joint angles (T x 7), radians.
// Joints 1-3: planar IK of the right wrist path in the shoulder's x-z plane, scaled
// to the robot's reach. Joints 4-7: fixed tanh functions of the same frame.
Mat embodiment_map(const Mat& full_frames);
RowVec embodiment_frame(const Vec3& shoulder, const Vec3& elbow, const Vec3& wrist,
                        const Vec3& hand);

// Forward kinematics of joints 1-3; returns the planar flange position.
Eigen::Vector2d robot_planar_fk(double q1, double q2, double q3);

}  // namespace hme
