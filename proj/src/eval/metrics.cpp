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

#include "hme/eval/metrics.hpp"

#include <cmath>

#include "hme/errors.hpp"

namespace hme {

HorizonCurve mspe_curve(const std::vector<Mat>& predicted, const std::vector<Mat>& truth,
                        const std::string& units) {
  require(!predicted.empty() && predicted.size() == truth.size(),
          "mspe_curve: need matching, non-empty window lists");
  const Eigen::Index w = truth.front().rows();
  const Eigen::Index dims = truth.front().cols();
  RowVec sq = RowVec::Zero(w);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(predicted[i].rows() == w && predicted[i].cols() == dims && truth[i].rows() == w &&
                truth[i].cols() == dims,
            "mspe_curve: window shapes differ");
    sq += (predicted[i] - truth[i]).array().square().matrix().rowwise().sum().transpose();
  }
  HorizonCurve c;
  c.units = units;
  const double n = static_cast<double>(truth.size() * static_cast<std::size_t>(dims));
  for (Eigen::Index k = 0; k < w; ++k) c.values.push_back(std::sqrt(sq(k) / n));
  return c;
}

double nrmsd(const std::vector<Mat>& predicted, const std::vector<Mat>& truth,
             const Normalizer& normalizer, int joint) {
  require(!truth.empty() && predicted.size() == truth.size(), "nrmsd: need matching trial lists");
  require(joint >= 0 && joint < normalizer.min.size(), "nrmsd: joint out of range");
  const double range = normalizer.max(joint) - normalizer.min(joint);
  require(range > 0.0, "nrmsd: joint " + std::to_string(joint) + " has zero range in training data");
  double total = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(predicted[i].rows() == truth[i].rows() && truth[i].rows() >= 1 &&
                predicted[i].cols() > joint && truth[i].cols() > joint,
            "nrmsd: trial shapes differ");
    const double ss = (truth[i].col(joint) - predicted[i].col(joint)).squaredNorm();
    total += std::sqrt(ss / (static_cast<double>(truth[i].rows()) * range));
  }
  return total / static_cast<double>(truth.size());
}

}  // namespace hme
