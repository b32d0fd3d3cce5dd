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

#include <utility>
#include <vector>

#include "hme/nn/tensor.hpp"

namespace hme {

using WarpPath = std::vector<std::pair<Eigen::Index, Eigen::Index>>;

struct DtwMatch {
  double cost = 0.0;
  // Monotone pairs (i into a, j into b) from (0,0) to (|a|-1, |b|-1).
  WarpPath path;
};

// Absolute-difference local cost.
DtwMatch dtw_match(const Vec& a, const Vec& b);
double dtw_distance(const Vec& a, const Vec& b);

struct DtwAlignment {
  std::size_t reference_index = 0;
  Eigen::Index length = 0;
  std::vector<Vec> aligned;
  std::vector<double> costs;
  std::vector<WarpPath> paths;
};

// The reference is the lower-median-length sequence.
DtwAlignment dtw_align(const std::vector<Vec>& sequences);

}  // namespace hme
