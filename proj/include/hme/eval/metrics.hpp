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

#include <string>
#include <vector>

#include "hme/data/preprocess.hpp"

namespace hme {

struct HorizonCurve {
  std::vector<double> values;  // offset 1..w
  std::string units;           // "m" or "normalized"
};

// Per offset: root of the mean squared error over windows and dims. All windows are w x dims.
HorizonCurve mspe_curve(const std::vector<Mat>& predicted, const std::vector<Mat>& truth,
                        const std::string& units);

// Mean over trials of sqrt( sum_t (x - x_hat)^2 / (T * (j_max - j_min)) ) for joint j,
// with j_min and j_max taken from the training-data normalizer.
double nrmsd(const std::vector<Mat>& predicted, const std::vector<Mat>& truth,
             const Normalizer& normalizer, int joint);

}  // namespace hme
