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
#include <vector>

#include "hme/nn/tensor.hpp"

namespace hme {

struct FactorConfig {
  int n_factors = 2;
  int max_iterations = 500;
  double tolerance = 1e-8;
  double psi_floor = 1e-6;
};

// Maximum-likelihood factor analysis of standardized data, fitted by EM.
struct FactorModel {
  Mat loadings;            // dims x k, ordered by explained variance
  Vec unique_variances;    // dims
  Mat scores;              // T x k, regression method
  Vec explained_variance;  // per factor, fraction of total standardized variance
  RowVec mean;
  RowVec scale;
  int iterations = 0;
  double log_likelihood = 0.0;
};

FactorModel factor_analysis(const Mat& data, const FactorConfig& config = {});

struct CrossCorrelation {
  double value = 0.0;  // max |normalized cross-correlation|
  int lag = 0;         // b lags a by this many frames
};

// Pearson correlation of a[t] and b[t + lag] over the overlap, maximized in |.| over |lag| <= max_lag.
CrossCorrelation max_cross_correlation(const Vec& a, const Vec& b, int max_lag);

struct EntrainmentConfig {
  int max_lag = 20;
  int factor = 1;  // zero-based; the second factor
  int permutations = 1000;
  double quantile = 0.95;
  std::uint64_t seed = 0;
  FactorConfig fa;
};

struct EntrainmentScore {
  std::vector<CrossCorrelation> per_factor;
  double threshold = 0.0;  // permutation quantile for the configured factor
  bool significant = false;
};

// Factor analysis runs independently on each stream; rows must be time-aligned.
EntrainmentScore entrainment_score(const Mat& human_d, const Mat& robot_z,
                                   const EntrainmentConfig& config = {});

// Quantile of max |cross-correlation| after shuffling b in time.
double permutation_threshold(const Vec& a, const Vec& b, int max_lag, int permutations,
                             double quantile, std::uint64_t seed);

}  // namespace hme
