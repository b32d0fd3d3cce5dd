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

#include "hme/nn/autodiff.hpp"
#include "hme/nn/tensor.hpp"

namespace hme {

inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;
inline constexpr double kLog2Pi = 1.8378770664093454836;

// Diagonal Gaussian. log_var is always within [kLogVarMin, kLogVarMax].
struct GaussianParams {
  Vec mean;
  Vec log_var;

  Eigen::Index dim() const { return mean.size(); }
};

// Clamps log_var; throws on length mismatch.
GaussianParams make_gaussian(Vec mean, Vec log_var);
GaussianParams standard_normal_params(Eigen::Index dim);

// KL(q || p), summed over dimensions.
double kl_diag_gaussian(const GaussianParams& q, const GaussianParams& p);
double gaussian_loglik(const Vec& x, const GaussianParams& g);
Vec reparameterize(const GaussianParams& g, const Vec& noise);

// Monte-Carlo Jensen-Shannon divergence with reparameterized samples.
// Deterministic in `seed`.
double jsd_mc(const GaussianParams& p, const GaussianParams& q, int num_samples,
              std::uint64_t seed);

// Row-batched kernels shared by the value and tape paths.
Vec kl_rows(const Mat& q_mean, const Mat& q_log_var, const Mat& p_mean, const Mat& p_log_var);
Vec loglik_rows(const Mat& x, const Mat& mean, const Mat& log_var);

// Standard-normal draws for jsd_mc: `samples` stacked blocks of rows x dims,
// first for p then for q.
struct JsdNoise {
  Mat for_p;
  Mat for_q;
  int samples = 0;
};
JsdNoise make_jsd_noise(Eigen::Index rows, Eigen::Index dims, int samples, Rng& rng);

namespace ad {

// Row batch of diagonal Gaussians on a tape.
struct GaussianVar {
  Var mean;
  Var log_var;
};

// Each returns rows x 1.
Var kl_diag_gaussian(GaussianVar q, GaussianVar p);
Var gaussian_loglik(Var x, GaussianVar g);
Var jsd_mc(GaussianVar p, GaussianVar q, const JsdNoise& noise);

Var reparameterize(GaussianVar g, Var noise);

}  // namespace ad
}  // namespace hme
