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


#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "hme/errors.hpp"
#include "hme/eval/benchmark.hpp"
#include "hme/eval/factor.hpp"
#include "hme/eval/metrics.hpp"
#include "support/tiny_world.hpp"

using namespace hme;

namespace {

Normalizer robot_norm(double lo, double hi) {
  Normalizer n;
  n.kind = AgentKind::kRobot;
  n.mean = RowVec::Zero(kRobotDims);
  n.std = RowVec::Ones(kRobotDims);
  n.min = RowVec::Constant(kRobotDims, lo);
  n.max = RowVec::Constant(kRobotDims, hi);
  return n;
}

Mat random_mat(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  return standard_normal(r, c, rng);
}

// Written out term by term with plain loops.
double nrmsd_reference(const std::vector<Mat>& pred, const std::vector<Mat>& truth, double jmin,
                       double jmax, int j) {
  double acc = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    long double s = 0.0L;
    for (Eigen::Index t = 0; t < truth[i].rows(); ++t) {
      const long double e = truth[i](t, j) - pred[i](t, j);
      s += e * e;
    }
    const long double ttr = static_cast<long double>(truth[i].rows());
    acc += static_cast<double>(std::sqrt(s / (ttr * (jmax - jmin))));
  }
  return acc / static_cast<double>(truth.size());
}

double principal_angle_deg(const Mat& a, const Mat& b) {
  const Mat qa = Eigen::HouseholderQR<Mat>(a).householderQ() * Mat::Identity(a.rows(), a.cols());
  const Mat qb = Eigen::HouseholderQR<Mat>(b).householderQ() * Mat::Identity(b.rows(), b.cols());
  const Eigen::JacobiSVD<Mat> svd(qa.transpose() * qb);
  const double smallest = std::min(1.0, svd.singularValues().minCoeff());
  return std::acos(smallest) * 180.0 / std::numbers::pi;
}

// Smooth aperiodic signal, so a delay has a single best lag.
Vec ar_signal(Eigen::Index T, std::uint64_t seed) {
  Rng rng(seed);
  const Mat e = standard_normal(T, 1, rng);
  Vec v(T);
  v(0) = e(0, 0);
  for (Eigen::Index t = 1; t < T; ++t) v(t) = 0.85 * v(t - 1) + e(t, 0);
  return v;
}

Vec sine(Eigen::Index T, double freq, double phase) {
  Vec v(T);
  for (Eigen::Index t = 0; t < T; ++t) v(t) = std::sin(2.0 * std::numbers::pi * freq * t / 40.0 + phase);
  return v;
}

// Two factors: a slow drift and an oscillation, spread over `dims` channels.
Mat two_factor_stream(const Vec& slow, const Vec& osc, int dims, std::uint64_t seed, double noise) {
  Rng rng(seed);
  const Mat lambda = standard_normal(dims, 2, rng);
  Mat z(slow.size(), 2);
  z.col(0) = 2.0 * slow;
  z.col(1) = osc;
  return z * lambda.transpose() + noise * standard_normal(slow.size(), dims, rng);
}

}  // namespace

TEST_CASE("mspe: perfect, constant offset and the dataset-mean predictor") {
  std::vector<Mat> truth, pred, off;
  for (int i = 0; i < 5; ++i) {
    truth.push_back(random_mat(40, 6, 100 + i));
    pred.push_back(truth.back());
    off.push_back(truth.back().array() + 0.1);
  }
  for (double v : mspe_curve(pred, truth, "m").values) CHECK(v == 0.0);
  const HorizonCurve c = mspe_curve(off, truth, "m");
  CHECK(c.values.size() == 40);
  CHECK(c.units == "m");
  for (double v : c.values) CHECK(v == doctest::Approx(0.1).epsilon(1e-12));

  // Predict the per-dim mean over all windows; the error at each offset is the RMS deviation
  // of that offset's frames around the pooled mean.
  RowVec mu = RowVec::Zero(6);
  for (const Mat& t : truth) mu += t.colwise().sum();
  mu /= 5.0 * 40.0;
  std::vector<Mat> mean_pred(5, Mat(mu.replicate(40, 1)));
  const HorizonCurve m = mspe_curve(mean_pred, truth, "m");
  for (int k = 0; k < 40; ++k) {
    double s = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int d = 0; d < 6; ++d) s += std::pow(truth[static_cast<std::size_t>(i)](k, d) - mu(d), 2);
    CHECK(m.values[static_cast<std::size_t>(k)] == doctest::Approx(std::sqrt(s / 30.0)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(mspe_curve({}, {}, "m"), ContractError);
  CHECK_THROWS_AS(mspe_curve({truth[0]}, {Mat(truth[0].topRows(39))}, "m"), ContractError);
}

TEST_CASE("nrmsd: hand-evaluated case and an independent implementation") {
  const Mat truth = Mat::Zero(100, kRobotDims);
  const Mat pred = Mat::Constant(100, kRobotDims, 0.1);
  const Normalizer n = robot_norm(-1.0, 1.0);
  CHECK(std::abs(nrmsd({pred}, {truth}, n, 0) - std::sqrt(0.005)) < 1e-12);
  CHECK(nrmsd({truth}, {truth}, n, 3) == 0.0);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<Mat> p, t;
    for (int i = 0; i < 4; ++i) {
      const Eigen::Index T = 30 + 7 * i;
      p.push_back(random_mat(T, kRobotDims, seed * 10 + i));
      t.push_back(random_mat(T, kRobotDims, 1000 + seed * 10 + i));
    }
    const Normalizer r = robot_norm(-0.3 * (seed + 1), 0.7 + seed);
    for (int j = 0; j < kRobotDims; ++j)
      CHECK(std::abs(nrmsd(p, t, r, j) - nrmsd_reference(p, t, r.min(j), r.max(j), j)) < 1e-12);
  }
  CHECK_THROWS_AS(nrmsd({pred}, {truth}, robot_norm(0.5, 0.5), 0), ContractError);
  CHECK_THROWS_AS(nrmsd({pred}, {truth}, n, 7), ContractError);
  CHECK_THROWS_AS(nrmsd({pred}, {Mat(truth.topRows(50))}, n, 0), ContractError);
}

TEST_CASE("factor analysis recovers known loadings") {
  Rng rng(3);
  const Mat lambda = standard_normal(8, 2, rng);
  const Mat z = standard_normal(2000, 2, rng);
  const Mat x = z * lambda.transpose() + 1e-3 * standard_normal(2000, 8, rng);
  const FactorModel fm = factor_analysis(x);
  CHECK(fm.loadings.rows() == 8);
  CHECK(fm.loadings.cols() == 2);
  CHECK(fm.scores.rows() == 2000);
  CHECK((fm.unique_variances.array() > 0.0).all());
  CHECK(fm.explained_variance(0) >= fm.explained_variance(1));
  // Loadings live in standardized units; map them back before comparing spans.
  const Mat back = fm.scale.transpose().asDiagonal() * fm.loadings;
  CHECK(principal_angle_deg(back, lambda) < 5.0);
  CHECK(fm.iterations <= 500);
}

TEST_CASE("factor analysis: noise-only data explains little variance") {
  const FactorModel fm = factor_analysis(random_mat(3000, 10, 4));
  CHECK(fm.explained_variance(0) < 0.10);
  CHECK(fm.explained_variance(1) < 0.10);
}

TEST_CASE("factor analysis: scaling the data leaves the scores unchanged") {
  const Mat x = two_factor_stream(sine(400, 0.1, 0.0), sine(400, 1.0, 0.3), 6, 5, 0.2);
  const FactorModel a = factor_analysis(x);
  const FactorModel b = factor_analysis(2.0 * x);
  CHECK((a.scores - b.scores).cwiseAbs().maxCoeff() < 1e-8);
  CHECK_THROWS_AS(factor_analysis(x, {.n_factors = 7}), ContractError);
  CHECK_THROWS_AS(factor_analysis(x.topRows(1)), ContractError);
}

TEST_CASE("cross-correlation: identity, delay and sign") {
  const Vec a = sine(300, 1.3, 0.0) + 0.3 * random_mat(300, 1, 6).col(0);
  const CrossCorrelation self = max_cross_correlation(a, a, 20);
  CHECK(self.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(self.lag == 0);
  Vec delayed(300);
  for (Eigen::Index t = 0; t < 300; ++t) delayed(t) = t >= 5 ? a(t - 5) : 0.0;
  CHECK(max_cross_correlation(a, delayed, 20).lag == 5);
  CHECK(max_cross_correlation(a, -delayed, 20).lag == 5);
  CHECK_THROWS_AS(max_cross_correlation(a, a.head(10), 3), ContractError);
  CHECK_THROWS_AS(max_cross_correlation(a.head(10), a.head(10), 20), ContractError);
}

TEST_CASE("entrainment: identical, delayed and noise streams") {
  const Eigen::Index T = 400;
  const Vec slow = sine(T, 0.08, 0.2);
  const Vec osc = ar_signal(T, 11);
  const Mat human = two_factor_stream(slow, osc, 8, 7, 0.1);
  EntrainmentConfig cfg;
  cfg.seed = 1;

  const EntrainmentScore same = entrainment_score(human, human, cfg);
  CHECK(same.per_factor[1].value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(same.per_factor[1].lag == 0);
  CHECK(same.significant);

  // The robot stream follows the same factors 5 frames later, through different loadings.
  Vec slow_d(T), osc_d(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    slow_d(t) = slow(std::max<Eigen::Index>(t - 5, 0));
    osc_d(t) = osc(std::max<Eigen::Index>(t - 5, 0));
  }
  const Mat robot = two_factor_stream(slow_d, osc_d, 5, 8, 0.1);
  const EntrainmentScore del = entrainment_score(human, robot, cfg);
  CHECK(del.per_factor[1].lag == 5);
  CHECK(del.per_factor[1].value > 0.9);
  CHECK(del.significant);

  // Sign flips and affine rescaling of either stream change nothing.
  const Mat affine = (-3.0 * robot).array() + 7.0;
  const EntrainmentScore inv = entrainment_score(human, affine, cfg);
  CHECK(inv.per_factor[1].value == doctest::Approx(del.per_factor[1].value).epsilon(1e-8));
  CHECK(inv.per_factor[1].lag == del.per_factor[1].lag);

  const EntrainmentScore noise = entrainment_score(human, random_mat(T, 5, 9), cfg);
  CHECK(noise.per_factor[1].value < noise.threshold);
  CHECK_FALSE(noise.significant);

  CHECK_THROWS_AS(entrainment_score(human, robot.topRows(T - 1), cfg), ContractError);
  cfg.factor = 2;
  CHECK_THROWS_AS(entrainment_score(human, robot, cfg), ContractError);
}

TEST_CASE("permutation threshold is deterministic and sits in (0, 1)") {
  const Vec a = sine(200, 1.0, 0.0);
  const Vec b = random_mat(200, 1, 10).col(0);
  const double t = permutation_threshold(a, b, 20, 1000, 0.95, 3);
  CHECK(t == permutation_threshold(a, b, 20, 1000, 0.95, 3));
  CHECK(t > 0.0);
  CHECK(t < 1.0);
  CHECK(permutation_threshold(a, b, 20, 1000, 0.5, 3) < t);
  CHECK_THROWS_AS(permutation_threshold(a, b, 20, 0, 0.95, 3), ContractError);
  CHECK_THROWS_AS(permutation_threshold(a, b, 20, 10, 1.0, 3), ContractError);
}

TEST_CASE("gaussian prediction pads with the last frame") {
  SynthConfig c = default_hri_config();
  for (Action a : kAllActions) c[a].trials = 0;
  c[Action::kHandShake].trials = 3;
  const GaussianTrajectoryModel m = fit_gaussian_baseline(synth_generate_hri(c));
  const Eigen::Index T = m.length(Action::kHandShake);
  const Mat longer = gaussian_prediction(m, Action::kHandShake, T + 25, 4);
  CHECK(longer.topRows(T) == sample_gaussian_baseline(m, Action::kHandShake, 4));
  for (Eigen::Index t = T; t < T + 25; ++t) CHECK(longer.row(t) == longer.row(T - 1));
  CHECK(gaussian_prediction(m, Action::kHandShake, 10, 4) == longer.topRows(10));
}

TEST_CASE("benchmark report: schema, determinism, CSV and validation") {
  const auto& w = hme::testing::tiny_world();
  const RobotContext ctx{&w.robot, &w.human, &w.dynamics};
  RobotMappingConfig rc;
  rc.epochs = 3;
  rc.batch_trials = 2;
  rc.learning_rate = 3e-3;
  const auto hme_map = train_robot_mapping(w.hri.train, ctx, rc).model;
  const auto hr = train_raw_variant(w.hri.train, w.robot, w.human, RawVariant::kHR, rc).model;
  const auto r = train_raw_variant(w.hri.train, w.robot, w.human, RawVariant::kR, rc).model;
  const auto g = fit_gaussian_baseline(w.hri.train);
  const BenchmarkModels models{&w.human, &w.dynamics, &w.robot, &hme_map, &hr, &r, &g};
  BenchmarkConfig cfg;
  cfg.entrainment.permutations = 200;

  const nlohmann::json rep = benchmark(models, w.hri.test, w.hhi.test, cfg, "0123456789abcdef");
  REQUIRE_NOTHROW(validate_report(rep));
  CHECK(rep["methods"].size() == 4);
  for (const auto& name : kBenchmarkMethods) {
    const auto& m = rep["methods"][name];
    CHECK(m["nrmsd_per_joint"].size() == 7);
    CHECK(m["mspe_curve"].size() == 40);
    double s = 0.0;
    for (double v : m["nrmsd_per_joint"]) s += v;
    CHECK(m["nrmsd_avg"].get<double>() == doctest::Approx(s / 7.0).epsilon(1e-12));
  }
  CHECK(rep["entrainment"]["per_action"].contains("hand_shake"));
  CHECK(rep["human_mspe_curve"].size() == 40);
  CHECK(rep.dump() == benchmark(models, w.hri.test, w.hhi.test, cfg, "0123456789abcdef").dump());

  // A rollout never sees the frames it is scored on.
  const InteractionTrial& t = w.hri.test.front();
  const GenerationModels gen{&w.human, &w.dynamics, &w.robot, &hme_map};
  InteractionTrial spoiled = t;
  spoiled.a1.frames.bottomRows(t.length() - 50).setConstant(0.4);
  spoiled.a2.frames.bottomRows(t.length() - 50).setConstant(0.4);
  const Mat a = benchmark_rollout(gen, t, cfg);
  const Mat b = benchmark_rollout(gen, spoiled, cfg);
  CHECK(a.rows() == t.length() - cfg.observe);
  CHECK(a.topRows(40) == b.topRows(40));
  CHECK_FALSE(a == b);

  const std::string csv = benchmark_csv(rep);
  CHECK(csv.rfind("method,quantity,index,value\n", 0) == 0);
  CHECK(csv.find("HME,nrmsd_avg") != std::string::npos);

  nlohmann::json bad = rep;
  bad["methods"].erase("Gaussian");
  CHECK_THROWS_AS(validate_report(bad), FormatError);
  bad = rep;
  bad["methods"]["HME"]["nrmsd_per_joint"].erase(0);
  CHECK_THROWS_AS(validate_report(bad), FormatError);
  bad = rep;
  bad["config_hash"] = "xyz";
  CHECK_THROWS_AS(validate_report(bad), FormatError);
}
