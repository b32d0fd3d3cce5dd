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
#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "hme/errors.hpp"
#include "hme/gen/generation.hpp"
#include "support/tiny_world.hpp"

using namespace hme;
using hme::testing::tiny_world;

namespace {

const RobotInteractionModel& mapping(RobotInput input) {
  static const auto train = [](RobotInput in) {
    const auto& w = tiny_world();
    RobotMappingConfig c;
    c.input = in;
    c.epochs = 8;
    c.batch_trials = 2;
    c.learning_rate = 3e-3;
    c.seed = 31;
    return train_robot_mapping(w.hri.train, {&w.robot, &w.human, &w.dynamics}, c).model;
  };
  static const RobotInteractionModel hme = train(RobotInput::kDynamics);
  static const RobotInteractionModel hr = train(RobotInput::kRawHuman);
  static const RobotInteractionModel r = train(RobotInput::kRobotOnly);
  return input == RobotInput::kDynamics ? hme : input == RobotInput::kRawHuman ? hr : r;
}

GenerationModels models(RobotInput input = RobotInput::kDynamics) {
  const auto& w = tiny_world();
  return {&w.human, &w.dynamics, &w.robot, &mapping(input)};
}

bool bit_equal(const Mat& a, const Mat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::equal(a.data(), a.data() + a.size(), b.data());
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

TEST_CASE("rollout_human: horizon lengths and the first decoded frame") {
  const auto& w = tiny_world();
  const Mat& x = w.hhi.test.front().a1.frames;
  const Mat out = rollout_human(w.dynamics, w.human, x.topRows(10), 40);
  CHECK(out.rows() == 40);
  CHECK(out.cols() == x.cols());
  const Mat one = rollout_human(w.dynamics, w.human, x.topRows(10), 1);
  REQUIRE(one.rows() == 1);
  CHECK(bit_equal(one, out.topRows(1)));
  CHECK(bit_equal(rollout_human(w.dynamics, w.human, x.topRows(10), 40), out));
  CHECK(rollout_human(w.dynamics, w.human, x.topRows(10), 97, {10}).rows() == 97);
  CHECK_THROWS_AS(rollout_human(w.dynamics, w.human, x.topRows(0), 5), ContractError);
  CHECK_THROWS_AS(rollout_human(w.dynamics, w.human, x.topRows(3), 0), ContractError);
  CHECK_THROWS_AS(rollout_human(w.dynamics, w.human, x.topRows(3), 5, {41}), ContractError);
}

TEST_CASE("rollout_human keeps the frequency of a sine-driven trial over 4 s") {
  // Two-dim sines at 1.2 Hz with random phase for both partners.
  const double freq = 1.2;
  Rng rng(61);
  std::vector<InteractionTrial> trials;
  for (int k = 0; k < 12; ++k) {
    const double p1 = 2.0 * std::numbers::pi * std::uniform_real_distribution<double>(0, 1)(rng);
    const double p2 = p1 + std::uniform_real_distribution<double>(-0.2, 0.2)(rng);
    Mat a(320, 2), b(320, 2);
    for (Eigen::Index i = 0; i < 320; ++i) {
      const double ph = 2.0 * std::numbers::pi * freq * i / 40.0;
      a.row(i) << std::sin(ph + p1), 0.5 * std::cos(ph + p1);
      b.row(i) << std::sin(ph + p2), 0.5 * std::cos(ph + p2);
    }
    InteractionTrial t;
    t.trial_id = "sine-" + std::to_string(k);
    t.pair_type = PairType::kHHI;
    t.a1 = {AgentKind::kHuman, a, 40.0};
    t.a2 = {AgentKind::kHuman, b, 40.0};
    trials.push_back(std::move(t));
  }
  const Normalizer n = fit_normalizer(trials, AgentKind::kHuman);
  EmbeddingConfig ec;
  ec.latent_dim = 4;
  ec.hidden = {64};
  ec.activation = Activation::kRelu;
  ec.epochs = 40;
  ec.batch_size = 32;
  ec.learning_rate = 2e-3;
  ec.seed = 62;
  const EmbeddingModel emb =
      train_embedding(training_windows(trials, AgentKind::kHuman, n, {40, 2}), ec, AgentKind::kHuman, 2, n).model;
  DynamicsConfig dc;
  dc.state_dim = 32;
  dc.d_dim = 4;
  dc.epochs = 30;
  dc.batch_trials = 4;
  dc.learning_rate = 3e-3;
  dc.seed = 63;
  const DynamicsModel dyn = train_dynamics(trials, emb, dc).model;

  const Mat out = rollout_human(dyn, emb, trials.front().a1.frames.topRows(40), 160, {10});
  const double f = dominant_frequency(out.col(0), 40.0, 0.2, 10.0);
  INFO("rollout frequency ", f, " true ", freq);
  CHECK(std::abs(f - freq) <= 0.1 * freq);
}

TEST_CASE("rollout_robot: length, clamping, determinism for every variant") {
  const auto& w = tiny_world();
  const InteractionTrial& t = w.hri.test.front();
  for (RobotInput in : {RobotInput::kDynamics, RobotInput::kRawHuman, RobotInput::kRobotOnly}) {
    const GenerationModels g = models(in);
    const Mat out = rollout_robot(g, t.a1.frames.topRows(10), t.a2.frames.topRows(10), 40, {10});
    CHECK(out.rows() == 40);
    CHECK(out.cols() == 7);
    CHECK(out.cwiseAbs().maxCoeff() <= std::numbers::pi);
    CHECK(bit_equal(rollout_robot(g, t.a1.frames.topRows(10), t.a2.frames.topRows(10), 40, {10}), out));
    CHECK(rollout_robot(g, t.a1.frames.topRows(10), t.a2.frames.topRows(10), 1).rows() == 1);
  }
  const GenerationModels g = models();
  CHECK_THROWS_AS(rollout_robot(g, t.a1.frames.topRows(9), t.a2.frames.topRows(10), 5), ContractError);
  GenerationModels missing = g;
  missing.dynamics = nullptr;
  CHECK_THROWS_AS(rollout_robot(missing, t.a1.frames.topRows(10), t.a2.frames.topRows(10), 5),
                  ContractError);
}

TEST_CASE("Raw R ignores the human prefix; Raw HR and HME react to it") {
  const auto& w = tiny_world();
  const InteractionTrial& t = w.hri.test.front();
  const Mat human = t.a1.frames.middleRows(60, 30);
  const Mat other = w.hri.test.back().a1.frames.middleRows(200, 30);
  const Mat robot = t.a2.frames.middleRows(60, 30);
  const auto run = [&](RobotInput in, const Mat& h) { return rollout_robot(models(in), h, robot, 40); };
  CHECK(bit_equal(run(RobotInput::kRobotOnly, human), run(RobotInput::kRobotOnly, other)));
  CHECK_FALSE(bit_equal(run(RobotInput::kRawHuman, human), run(RobotInput::kRawHuman, other)));
  CHECK_FALSE(bit_equal(run(RobotInput::kDynamics, human), run(RobotInput::kDynamics, other)));
}

TEST_CASE("online_step equals batch rollout at every refresh, bit for bit") {
  const auto& w = tiny_world();
  const InteractionTrial& t = w.hri.test.front();
  for (RobotInput in : {RobotInput::kDynamics, RobotInput::kRawHuman, RobotInput::kRobotOnly}) {
    const GenerationModels g = models(in);
    const RowVec r0 = t.a2.frames.row(0);
    RolloutState s = make_rollout_state(g, r0, 4);
    Mat sent(t.length(), 7);
    sent.row(0) = r0;
    int refreshes = 0;
    for (Eigen::Index n = 1; n <= 70; ++n) {
      const OnlineOutput o = online_step(s, g, t.a1.frames.row(n - 1));
      CHECK(o.refreshed == (n == 1 || n % 4 == 0));
      if (o.refreshed) {
        ++refreshes;
        const Mat batch = rollout_robot(g, t.a1.frames.topRows(n), sent.topRows(n), w.robot.window());
        CHECK(bit_equal(s.robot_window, batch));
        CHECK(bit_equal(o.command, batch.topRows(1)));
        if (in == RobotInput::kDynamics) {
          const Mat human = rollout_human(w.dynamics, w.human, t.a1.frames.topRows(n), w.human.window());
          CHECK(bit_equal(s.human_window, human));
        }
      }
      sent.row(n) = o.command;
    }
    CHECK(refreshes == 18);
  }
}

TEST_CASE("online_step rejects bad frames and leaves the state untouched") {
  const auto& w = tiny_world();
  const GenerationModels g = models();
  const InteractionTrial& t = w.hri.test.front();
  RolloutState s = make_rollout_state(g, rest_robot_frame());
  for (int i = 0; i < 5; ++i) online_step(s, g, t.a1.frames.row(i));
  const RolloutState before = s;
  RowVec bad = t.a1.frames.row(5);
  bad(3) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(online_step(s, g, bad), ContractError);
  CHECK_THROWS_AS(online_step(s, g, RowVec(RowVec::Zero(5))), ContractError);
  CHECK(bit_equal(s.h_human, before.h_human));
  CHECK(bit_equal(s.h_robot, before.h_robot));
  CHECK(bit_equal(s.robot_window, before.robot_window));
  CHECK(bit_equal(s.last_robot, before.last_robot));
  CHECK(s.cursor == before.cursor);
  CHECK(s.steps == before.steps);
  CHECK_THROWS_AS(make_rollout_state(g, RowVec(RowVec::Zero(6))), ContractError);
  CHECK_THROWS_AS(make_rollout_state(g, rest_robot_frame(), 0), ContractError);
}

TEST_CASE("interleaved sessions do not interact") {
  const auto& w = tiny_world();
  const GenerationModels g = models();
  const InteractionTrial& a = w.hri.test.front();
  const InteractionTrial& b = w.hri.test.back();
  RolloutState solo = make_rollout_state(g, rest_robot_frame());
  RolloutState s1 = make_rollout_state(g, rest_robot_frame());
  RolloutState s2 = make_rollout_state(g, rest_robot_frame());
  for (int i = 0; i < 30; ++i) {
    const OnlineOutput ref = online_step(solo, g, a.a1.frames.row(i));
    online_step(s2, g, b.a1.frames.row(i + 7));
    const OnlineOutput got = online_step(s1, g, a.a1.frames.row(i));
    CHECK(bit_equal(ref.command, got.command));
  }
}

TEST_CASE("online_step latency at default dimensions") {
  const auto& w = tiny_world();
  EmbeddingConfig ec;
  ec.latent_dim = 16;
  ec.hidden = {128};
  ec.activation = Activation::kRelu;
  const EmbeddingModel human = make_embedding(ec, AgentKind::kHuman, w.human.dims, w.human.normalizer);
  const EmbeddingModel robot = make_embedding(ec, AgentKind::kRobot, 7, w.robot.normalizer);
  const DynamicsModel dyn = make_dynamics(DynamicsConfig{}, human.dims, 16);
  const RobotInteractionModel map = make_robot_mapping(RobotMappingConfig{}, DynamicsConfig{}.d_dim, 16);
  const GenerationModels g{&human, &dyn, &robot, &map};
  RolloutState s = make_rollout_state(g, rest_robot_frame());
  const Mat& x = w.hri.test.front().a1.frames;
  std::vector<double> ms;
  for (int i = 0; i < 400; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    online_step(s, g, x.row(i % x.rows()));
    ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  const double p99 = ms[static_cast<std::size_t>(0.99 * ms.size())];
  INFO("median ", ms[ms.size() / 2], " ms, p99 ", p99, " ms");
  CHECK(p99 < 5.0);
}
