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

#include "hme/nn/adam.hpp"

#include <cmath>

#include "hme/errors.hpp"

namespace hme {

AdamState make_adam_state(std::span<ParamTensor* const> params, const AdamConfig& config) {
  AdamState s;
  s.config = config;
  s.first_moment.reserve(params.size());
  s.second_moment.reserve(params.size());
  for (const ParamTensor* p : params) {
    s.first_moment.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    s.second_moment.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
  }
  return s;
}

void adam_step(AdamState& state, std::span<ParamTensor* const> params, std::span<const Mat> grads) {
  require(params.size() == grads.size() && params.size() == state.first_moment.size(),
          "adam_step: parameter/gradient/state count mismatch");
  const AdamConfig& c = state.config;
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Mat& value = params[i]->value;
    const Mat& g = grads[i];
    require(g.rows() == value.rows() && g.cols() == value.cols(),
            "adam_step: gradient shape mismatch for " + params[i]->name);
    Mat& m = state.first_moment[i];
    Mat& v = state.second_moment[i];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseAbs2();
    value.array() -= c.learning_rate * (m.array() / bc1) /
                     ((v.array() / bc2).sqrt() + c.epsilon);
  }
}

double clip_grad_norm(std::span<Mat> grads, double max_norm) {
  double sq = 0.0;
  for (const Mat& g : grads) sq += g.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double f = max_norm / norm;
    for (Mat& g : grads) g *= f;
  }
  return norm;
}

}  // namespace hme
