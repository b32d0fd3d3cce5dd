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


#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>

#include "doctest.h"
#include "hme/errors.hpp"
#include "hme/model/dynamics.hpp"
#include "hme/nn/ops.hpp"
#include "support/gradcheck.hpp"
#include "support/tiny_world.hpp"

using namespace hme;
using hme::testing::tiny_world;

namespace {

DynamicsConfig small_config(std::uint64_t seed) {
  DynamicsConfig c;
  c.state_dim = 8;
  c.d_dim = 4;
  c.head_hidden = {6};
  c.jsd_samples = 4;
  c.seed = seed;
  return c;
}

// One trial, `steps` random steps; the last step is masked out as past the trial end.
SequenceBatch random_batch(int agents, Eigen::Index input_dim, int latent, int steps, Rng& rng) {
  SequenceBatch b;
  b.agents = agents;
  b.trials = 1;
  for (int s = 0; s < steps; ++s) {
    b.inputs.push_back(standard_normal(agents, input_dim, rng));
    b.q_mean.push_back(standard_normal(agents, latent, rng));
    b.q_log_var.push_back(0.3 * standard_normal(agents, latent, rng));
    Mat mask = Mat::Ones(agents, 1);
    if (s == steps - 1) mask.setZero();
    b.mask.push_back(mask);
  }
  return b;
}

void swap_rows(Mat& m) { m.row(0).swap(m.row(1)); }

double total_loss(const DynamicsModel& m, const SequenceBatch& b, const DynamicsNoise& noise) {
  ad::Tape tape;
  const auto l = ad::dynamics_loss(tape, m, b, 0, b.steps(), tape.constant(Mat::Zero(b.rows(), m.state_dim())), noise);
  return l.kl_sum.value()(0, 0) + l.jsd_sum.value()(0, 0);
}

double dominant_frequency(const Vec& x, double rate, double lo, double hi) {
  const Vec c = x.array() - x.mean();
  double best = 0.0, best_mag = -1.0;
  for (double f = lo; f <= hi; f += 0.002) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i)
      acc += c(i) * std::polar(1.0, -2.0 * std::numbers::pi * f * i / rate);
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best = f;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("advance with zero weights halves the state and returns the head bias") {
  DynamicsModel m = make_dynamics(small_config(1), 5, 3);
  for (ParamTensor* p : params_of(m)) p->value.setZero();
  Rng rng(2);
  const Mat bias = standard_normal(1, 2 * 4, rng);
  m.dynamics_head.net.layers.back().bias.value = bias;
  const Mat h = standard_normal(2, 8, rng);
  const DynamicsStep s = advance(m, h, standard_normal(2, 5, rng));
  CHECK(s.h.isApprox(0.5 * h, 1e-15));
  for (Eigen::Index r = 0; r < 2; ++r) CHECK(s.d.mean.row(r) == bias.leftCols(4));
}

TEST_CASE("advance unroll matches a step-by-step formula replay") {
  DynamicsModel m = make_dynamics(small_config(3), 5, 3);
  Rng rng(4);
  const Mat frames = standard_normal(10, 5, rng);
  const Mat means = extract_dynamics_means(m, frames);
  REQUIRE(means.rows() == 10);

  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  Vec h = Vec::Zero(8);
  for (Eigen::Index t = 0; t < 10; ++t) {
    if (t > 0) {
      const Vec x = frames.row(t - 1).transpose();
      const Mat& wi = m.gru.w_input.value;
      const Mat& wh = m.gru.w_hidden.value;
      const Vec gi = wi * x + m.gru.b_input.value.transpose();
      const Vec gh = wh * h + m.gru.b_hidden.value.transpose();
      Vec next(8);
      for (int j = 0; j < 8; ++j) {
        const double r = sig(gi(j) + gh(j));
        const double z = sig(gi(8 + j) + gh(8 + j));
        const double n = std::tanh(gi(16 + j) + r * gh(16 + j));
        next(j) = (1.0 - z) * n + z * h(j);
      }
      h = next;
    }
    // Head: tanh hidden layer then linear, mean is the first half.
    const auto& l0 = m.dynamics_head.net.layers[0];
    const auto& l1 = m.dynamics_head.net.layers[1];
    const Vec a = (l0.weight.value * h + l0.bias.value.transpose()).array().tanh();
    const Vec out = l1.weight.value * a + l1.bias.value.transpose();
    CHECK((means.row(t).transpose() - out.head(4)).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(extract_dynamics_means(m, frames) == means);
}

TEST_CASE("latent_from_dynamics shape and determinism") {
  DynamicsModel m = make_dynamics(small_config(5), 5, 3);
  Rng rng(6);
  const Vec d = standard_normal(4, 1, rng).col(0);
  const GaussianParams a = latent_from_dynamics(m, d);
  CHECK(a.dim() == 3);
  CHECK(latent_from_dynamics(m, d).mean == a.mean);
  CHECK_THROWS_AS(latent_from_dynamics(m, Vec(Vec::Zero(3))), ContractError);
  CHECK_THROWS_AS(advance(m, Mat::Zero(1, 7), Mat::Zero(1, 5)), ContractError);
}

TEST_CASE("dynamics loss gradient matches finite differences on 10 seeds") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    DynamicsConfig c = small_config(seed);
    c.reverse_kl = seed % 2 == 1;
    DynamicsModel m = make_dynamics(c, 3, 2);
    Rng rng(50 + seed);
    const SequenceBatch b = random_batch(2, 3, 2, 10, rng);
    const DynamicsNoise noise = make_dynamics_noise(m, b, 0, 10, rng);
    auto params = params_of(m);
    const auto res = testing::check_gradients(params, [&](ad::Tape& tape) {
      const auto l = ad::dynamics_loss(tape, m, b, 0, 10, tape.constant(Mat::Zero(2, 8)), noise);
      return ad::add(l.kl_sum, l.jsd_sum);
    });
    INFO("seed ", seed, " worst ", res.worst_param);
    CHECK(res.relative_error < 1e-4);
  }
}

TEST_CASE("dynamics loss is symmetric in the two partners") {
  DynamicsModel m = make_dynamics(small_config(7), 3, 2);
  Rng rng(8);
  const SequenceBatch b = random_batch(2, 3, 2, 12, rng);
  const DynamicsNoise noise = make_dynamics_noise(m, b, 0, 12, rng);
  SequenceBatch sb = b;
  DynamicsNoise sn = noise;
  for (std::size_t s = 0; s < b.steps(); ++s) {
    swap_rows(sb.inputs[s]);
    swap_rows(sb.q_mean[s]);
    swap_rows(sb.q_log_var[s]);
    swap_rows(sb.mask[s]);
    swap_rows(sn.d[s]);
    std::swap(sn.jsd[s].for_p, sn.jsd[s].for_q);
  }
  const double a = total_loss(m, b, noise);
  const double c = total_loss(m, sb, sn);
  CHECK(c == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("per-step KL is non-negative and JSD is above the Monte-Carlo floor") {
  const auto& w = tiny_world();
  DynamicsModel m = w.dynamics;
  m.config.jsd_samples = 1024;
  const SequenceBatch b = make_dynamics_batch({&w.hhi.test.front()}, w.human);
  Rng rng(9);
  Mat h = Mat::Zero(b.rows(), m.state_dim());
  for (std::size_t s = 0; s < b.steps(); s += 7) {
    const DynamicsNoise noise = make_dynamics_noise(m, b, s, 1, rng);
    ad::Tape tape;
    const auto l = ad::dynamics_loss(tape, m, b, s, 1, tape.constant(h), noise);
    CHECK(l.kl_sum.value()(0, 0) >= 0.0);
    CHECK(l.jsd_sum.value()(0, 0) >= -0.02);
    ad::Tape advance_tape;
    const auto next = ad::dynamics_loss(advance_tape, m, b, s, std::min<std::size_t>(7, b.steps() - s),
                                        advance_tape.constant(h),
                                        make_dynamics_noise(m, b, s, std::min<std::size_t>(7, b.steps() - s), rng));
    h = next.h_end.value();
  }
}

TEST_CASE("training lowers the loss; the JSD term pulls the partners' dynamics together") {
  const auto& w = tiny_world();
  REQUIRE(w.dynamics_trace.size() == static_cast<std::size_t>(w.dynamics_config.epochs));
  CHECK(w.dynamics_trace.back() < w.dynamics_trace.front());
  const DynamicsModel init = make_dynamics(w.dynamics_config, w.human.dims, w.human.latent_dim());
  const DynamicsEval before = evaluate_dynamics(init, w.hhi.test, w.human, 77);
  const DynamicsEval after = evaluate_dynamics(w.dynamics, w.hhi.test, w.human, 77);
  CHECK(after.kl < before.kl);

  DynamicsConfig no_jsd = w.dynamics_config;
  no_jsd.jsd_weight = 0.0;
  const DynamicsModel ablated = train_dynamics(w.hhi.train, w.human, no_jsd).model;
  const DynamicsEval without = evaluate_dynamics(ablated, w.hhi.test, w.human, 77);
  INFO("jsd init ", before.jsd, " trained ", after.jsd, " trained without the term ", without.jsd);
  CHECK(after.jsd < without.jsd);
}

TEST_CASE("training is deterministic given the seed") {
  const auto& w = tiny_world();
  DynamicsConfig c = w.dynamics_config;
  c.epochs = 2;
  const std::vector<InteractionTrial> few(w.hhi.train.begin(), w.hhi.train.begin() + 4);
  const TrainedDynamics a = train_dynamics(few, w.human, c);
  const TrainedDynamics b = train_dynamics(few, w.human, c);
  CHECK(a.loss_trace == b.loss_trace);
  CHECK(a.model.gru.w_hidden.value == b.model.gru.w_hidden.value);
}

TEST_CASE("extracted dynamics: one row per frame, pure, oscillating with the hand") {
  const auto& w = tiny_world();
  const InteractionTrial& t = w.hhi.test.front();
  const Mat x = apply(w.human.normalizer, t.a1.frames);
  const Mat d = extract_dynamics_means(w.dynamics, x);
  CHECK(d.rows() == t.length());
  CHECK(d.cols() == w.dynamics.d_dim());
  CHECK(extract_dynamics_means(w.dynamics, x) == d);

  // Oscillation segment of the trial, measured on the hand and on the leading d component.
  Rng rng(trial_seed(5, PairType::kHHI, 0));
  const std::string& id = t.trial_id;
  const int index = std::stoi(id.substr(id.size() - 3));
  Rng plan_rng(trial_seed(5, PairType::kHHI, static_cast<std::size_t>(index)));
  const TrialPlan plan = plan_trial(default_hhi_config()[t.action], t.action, PairType::kHHI, plan_rng);
  const auto i0 = static_cast<Eigen::Index>(std::ceil((plan.osc_start + 0.3) * 40.0));
  const auto i1 = static_cast<Eigen::Index>(std::floor((plan.osc_end - 0.3) * 40.0));
  const Mat seg = d.middleRows(i0, i1 - i0);
  const Mat centered = seg.rowwise() - seg.colwise().mean();
  Eigen::JacobiSVD<Mat> svd(centered, Eigen::ComputeThinV);
  const Vec pc = centered * svd.matrixV().col(0);
  const double f_d = dominant_frequency(pc, 40.0, 0.3, 5.0);
  INFO("d frequency ", f_d, " hand frequency ", plan.freq);
  CHECK(std::abs(f_d - plan.freq) <= 0.15 * plan.freq);
}

TEST_CASE("predicted next window beats the dataset-mean predictor") {
  const auto& w = tiny_world();
  const WindowSpec spec{40, 1};
  const Mat train = training_windows(w.hhi.train, AgentKind::kHuman, w.human.normalizer, spec);
  const RowVec mean_window = train.colwise().mean();
  double err_model = 0.0, err_mean = 0.0, n = 0.0;
  for (const auto& t : w.hhi.test) {
    const Mat x = apply(w.human.normalizer, t.a1.frames);
    const Mat d = extract_dynamics_means(w.dynamics, x);
    for (Eigen::Index s = 1; s + 40 <= x.rows(); s += 5) {
      const RowVec truth = flatten_window(x.middleRows(s, 40));
      const Vec z = latent_from_dynamics(w.dynamics, Vec(d.row(s).transpose())).mean;
      const RowVec pred = decode(w.human, z).mean.transpose();
      err_model += (pred - truth).squaredNorm();
      err_mean += (mean_window - truth).squaredNorm();
      n += truth.size();
    }
  }
  INFO("model rmse ", std::sqrt(err_model / n), " mean rmse ", std::sqrt(err_mean / n));
  CHECK(err_model < err_mean);
}

TEST_CASE("dynamics checkpoint round trip is bit-exact") {
  const auto& w = tiny_world();
  const DynamicsModel r = dynamics_from_checkpoint(
      deserialize_checkpoint(serialize_checkpoint(to_checkpoint(w.dynamics, "h"))));
  DynamicsModel a = w.dynamics, b = r;
  const auto pa = params_of(a);
  const auto pb = params_of(b);
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
  CHECK(r.config.d_dim == w.dynamics.config.d_dim);
  CHECK(r.latent_dim == w.dynamics.latent_dim);
}
