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

#include "hme/data/embodiment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hme/data/trial.hpp"
#include "hme/errors.hpp"

namespace hme {

namespace {

constexpr double kHumanReach = kUpperArm + kForearm + kHandLength;
constexpr double kRobotReach = kRobotLink1 + kRobotLink2 + kRobotLink3;

double wrap(double a) {
  constexpr double pi = std::numbers::pi;
  while (a > pi) a -= 2.0 * pi;
  while (a < -pi) a += 2.0 * pi;
  return a;
}

}  // namespace

RowVec embodiment_frame(const Vec3& shoulder, const Vec3& elbow, const Vec3& wrist,
                        const Vec3& hand) {
  const double scale = kRobotReach / kHumanReach;
  const Vec3 h = (hand - shoulder) * scale;
  const Vec3 dir = hand - wrist;
  const double phi = std::atan2(dir.z(), dir.x());
  const Eigen::Vector2d flange(h.x(), h.z());
  Eigen::Vector2d p = flange - kRobotLink3 * Eigen::Vector2d(std::cos(phi), std::sin(phi));
  const double lo = std::abs(kRobotLink1 - kRobotLink2) + 1e-6;
  const double hi = kRobotLink1 + kRobotLink2 - 1e-6;
  double d = p.norm();
  if (d < 1e-9) p = Eigen::Vector2d(0.0, -lo), d = lo;
  d = std::clamp(d, lo, hi);
  const double c2 =
      (d * d - kRobotLink1 * kRobotLink1 - kRobotLink2 * kRobotLink2) / (2.0 * kRobotLink1 * kRobotLink2);
  const double q2 = std::acos(std::clamp(c2, -1.0, 1.0));
  const double q1 =
      std::atan2(p.y(), p.x()) - std::atan2(kRobotLink2 * std::sin(q2), kRobotLink1 + kRobotLink2 * std::cos(q2));
  const double q3 = phi - q1 - q2;

  RowVec q(kRobotDims);
  q(0) = wrap(q1);
  q(1) = wrap(q2);
  q(2) = wrap(q3);
  q(3) = 0.6 * std::tanh(4.0 * (wrist.y() - shoulder.y() + 0.05));
  q(4) = 0.5 * std::tanh(3.0 * (wrist.z() - shoulder.z()));
  q(5) = 0.4 * std::tanh(5.0 * (hand.y() - wrist.y()));
  q(6) = 0.3 * std::tanh(6.0 * (elbow.x() - shoulder.x()));
  return q.cwiseMax(-std::numbers::pi).cwiseMin(std::numbers::pi);
}

Mat embodiment_map(const Mat& full) {
  require(full.cols() == 3 * joint::kCount, "embodiment_map: expected full-skeleton frames");
  Mat out(full.rows(), kRobotDims);
  for (Eigen::Index t = 0; t < full.rows(); ++t)
    out.row(t) = embodiment_frame(joint_position(full, t, joint::kRShoulder),
                                  joint_position(full, t, joint::kRElbow),
                                  joint_position(full, t, joint::kRWrist),
                                  joint_position(full, t, joint::kRHand));
  return out;
}

Eigen::Vector2d robot_planar_fk(double q1, double q2, double q3) {
  const double a = q1, b = q1 + q2, c = q1 + q2 + q3;
  return {kRobotLink1 * std::cos(a) + kRobotLink2 * std::cos(b) + kRobotLink3 * std::cos(c),
          kRobotLink1 * std::sin(a) + kRobotLink2 * std::sin(b) + kRobotLink3 * std::sin(c)};
}

}  // namespace hme
