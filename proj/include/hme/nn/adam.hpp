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
#include <span>
#include <vector>

#include "hme/nn/tensor.hpp"

namespace hme {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::int64_t step_count = 0;
  AdamConfig config;
  std::vector<Mat> first_moment;
  std::vector<Mat> second_moment;
};

AdamState make_adam_state(std::span<ParamTensor* const> params, const AdamConfig& config = {});

// One bias-corrected Adam update in place.
void adam_step(AdamState& state, std::span<ParamTensor* const> params, std::span<const Mat> grads);

// Rescales `grads` so their joint L2 norm is at most `max_norm`. Returns the norm before clipping.
double clip_grad_norm(std::span<Mat> grads, double max_norm);

}  // namespace hme
