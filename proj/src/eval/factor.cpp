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

#include "hme/eval/factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "hme/errors.hpp"

namespace hme {
namespace {

double gaussian_loglik(const Mat& sigma, const Mat& s, double n) {
  const Eigen::LDLT<Mat> ldlt(sigma);
  const double logdet = ldlt.vectorD().array().log().sum();
  const double tr = ldlt.solve(s).trace();
  return -0.5 * n * (logdet + tr + static_cast<double>(s.rows()) * std::log(2.0 * std::numbers::pi));
}

}  // namespace

FactorModel factor_analysis(const Mat& data, const FactorConfig& cfg) {
  const Eigen::Index T = data.rows(), p = data.cols();
  const int k = cfg.n_factors;
  require(k >= 1 && k <= p, "factor_analysis: need 1 <= n_factors <= dims");
  require(T >= 2, "factor_analysis: need at least two rows");
  require(data.allFinite(), "factor_analysis: data contains non-finite values");

  FactorModel fm;
  fm.mean = data.colwise().mean();
  Mat x = data.rowwise() - fm.mean;
  fm.scale = (x.array().square().colwise().sum() / static_cast<double>(T)).sqrt();
  for (Eigen::Index j = 0; j < p; ++j)
    if (fm.scale(j) <= 1e-12) fm.scale(j) = 1.0;
  x = x.array().rowwise() / fm.scale.array();
  const Mat s = (x.transpose() * x) / static_cast<double>(T);

  // Start from the principal axes.
  Eigen::SelfAdjointEigenSolver<Mat> eig(s);
  Mat lambda(p, k);
  for (int f = 0; f < k; ++f) {
    const Eigen::Index idx = p - 1 - f;
    lambda.col(f) = eig.eigenvectors().col(idx) * std::sqrt(std::max(eig.eigenvalues()(idx), 0.0));
  }
  Vec psi = (s.diagonal() - lambda.rowwise().squaredNorm()).cwiseMax(cfg.psi_floor);

  const Mat eye_k = Mat::Identity(k, k);
  double prev = -std::numeric_limits<double>::infinity();
  for (fm.iterations = 0; fm.iterations < cfg.max_iterations; ++fm.iterations) {
    const Mat sigma = lambda * lambda.transpose() + Mat(psi.asDiagonal());
    const double ll = gaussian_loglik(sigma, s, static_cast<double>(T));
    if (std::abs(ll - prev) < cfg.tolerance) break;
    prev = ll;
    const Mat beta = Eigen::LDLT<Mat>(sigma).solve(lambda).transpose();  // k x p
    const Mat sb = s * beta.transpose();                                 // p x k
    const Mat ezz = eye_k - beta * lambda + beta * sb;
    lambda = Eigen::LDLT<Mat>(ezz).solve(sb.transpose()).transpose();
    psi = (s.diagonal() - (lambda.array() * sb.array()).rowwise().sum().matrix()).cwiseMax(cfg.psi_floor);
  }
  const Mat sigma = lambda * lambda.transpose() + Mat(psi.asDiagonal());
  fm.log_likelihood = gaussian_loglik(sigma, s, static_cast<double>(T));

  // Rotate to orthogonal factors ordered by explained variance, largest loading positive.
  Eigen::SelfAdjointEigenSolver<Mat> rot(lambda.transpose() * lambda);
  Mat r(k, k);
  for (int f = 0; f < k; ++f) r.col(f) = rot.eigenvectors().col(k - 1 - f);
  lambda = lambda * r;
  for (int f = 0; f < k; ++f) {
    Eigen::Index arg = 0;
    lambda.col(f).cwiseAbs().maxCoeff(&arg);
    if (lambda(arg, f) < 0.0) lambda.col(f) = -lambda.col(f);
  }
  fm.loadings = lambda;
  fm.unique_variances = psi;
  fm.explained_variance = lambda.colwise().squaredNorm().transpose() / static_cast<double>(p);
  fm.scores = x * Eigen::LDLT<Mat>(sigma).solve(lambda);
  return fm;
}

CrossCorrelation max_cross_correlation(const Vec& a, const Vec& b, int max_lag) {
  require(a.size() == b.size(), "cross-correlation: series differ in length");
  require(max_lag >= 0 && a.size() > max_lag + 1, "cross-correlation: series too short for the lag range");
  CrossCorrelation best{-1.0, 0};
  const Eigen::Index T = a.size();
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    const Eigen::Index a0 = std::max<Eigen::Index>(0, -lag);
    const Eigen::Index n = T - std::abs(lag);
    const Vec u = a.segment(a0, n).array() - a.segment(a0, n).mean();
    const Vec v = b.segment(a0 + lag, n).array() - b.segment(a0 + lag, n).mean();
    const double den = u.norm() * v.norm();
    const double c = den > 0.0 ? std::abs(u.dot(v)) / den : 0.0;
    if (c > best.value || (c == best.value && std::abs(lag) < std::abs(best.lag))) best = {c, lag};
  }
  return best;
}

double permutation_threshold(const Vec& a, const Vec& b, int max_lag, int permutations,
                             double quantile, std::uint64_t seed) {
  require(permutations >= 1 && quantile > 0.0 && quantile < 1.0,
          "permutation_threshold: bad permutation count or quantile");
  Rng rng(seed);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(b.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> maxima;
  Vec shuffled(b.size());
  for (int i = 0; i < permutations; ++i) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (Eigen::Index t = 0; t < b.size(); ++t) shuffled(t) = b(idx[static_cast<std::size_t>(t)]);
    maxima.push_back(max_cross_correlation(a, shuffled, max_lag).value);
  }
  std::sort(maxima.begin(), maxima.end());
  const auto pos = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(maxima.size()))) - 1;
  return maxima[std::min(pos, maxima.size() - 1)];
}

EntrainmentScore entrainment_score(const Mat& human_d, const Mat& robot_z,
                                   const EntrainmentConfig& cfg) {
  require(human_d.rows() == robot_z.rows(), "entrainment: streams must be time-aligned");
  require(cfg.factor >= 0 && cfg.factor < cfg.fa.n_factors, "entrainment: factor out of range");
  const FactorModel fh = factor_analysis(human_d, cfg.fa);
  const FactorModel fr = factor_analysis(robot_z, cfg.fa);
  EntrainmentScore out;
  for (int f = 0; f < cfg.fa.n_factors; ++f)
    out.per_factor.push_back(max_cross_correlation(fh.scores.col(f), fr.scores.col(f), cfg.max_lag));
  if (cfg.permutations > 0) {
    out.threshold = permutation_threshold(fh.scores.col(cfg.factor), fr.scores.col(cfg.factor),
                                          cfg.max_lag, cfg.permutations, cfg.quantile, cfg.seed);
    out.significant = out.per_factor[static_cast<std::size_t>(cfg.factor)].value > out.threshold;
  }
  return out;
}

}  // namespace hme
