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

#include "hme/model/robot_mapping.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hme/errors.hpp"
#include "hme/nn/adam.hpp"
#include "hme/nn/ops.hpp"

namespace hme {

std::string_view model_kind(RobotInput input) {
  switch (input) {
    case RobotInput::kDynamics:
      return "robot-hri";
    case RobotInput::kRawHuman:
      return "raw-hr";
    case RobotInput::kRobotOnly:
      return "raw-r";
  }
  return "robot-hri";
}

RobotInput robot_input_from_kind(std::string_view kind) {
  if (kind == "robot-hri") return RobotInput::kDynamics;
  if (kind == "raw-hr") return RobotInput::kRawHuman;
  if (kind == "raw-r") return RobotInput::kRobotOnly;
  throw ContractError("unknown robot model kind '" + std::string(kind) + "'");
}

nlohmann::json to_json(const RobotMappingConfig& c) {
  return {{"input", model_kind(c.input)},
          {"state_dim", c.state_dim},
          {"head_hidden", c.head_hidden},
          {"activation", to_string(c.activation)},
          {"epochs", c.epochs},
          {"batch_trials", c.batch_trials},
          {"tbptt", c.tbptt},
          {"learning_rate", c.learning_rate},
          {"grad_clip", c.grad_clip},
          {"zero_dynamics", c.zero_dynamics},
          {"seed", c.seed}};
}

RobotMappingConfig robot_mapping_config_from_json(const nlohmann::json& j) {
  RobotMappingConfig c;
  c.input = robot_input_from_kind(j.at("input").get<std::string>());
  c.state_dim = j.at("state_dim").get<int>();
  c.head_hidden = j.at("head_hidden").get<std::vector<int>>();
  c.activation = activation_from_string(j.at("activation").get<std::string>());
  c.epochs = j.at("epochs").get<int>();
  c.batch_trials = j.at("batch_trials").get<int>();
  c.tbptt = j.at("tbptt").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.grad_clip = j.at("grad_clip").get<double>();
  c.zero_dynamics = j.at("zero_dynamics").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

RobotInteractionModel make_robot_mapping(const RobotMappingConfig& config, Eigen::Index aux_dim,
                                         int latent_dim) {
  require(config.state_dim >= 1 && latent_dim >= 1 && aux_dim >= 0,
          "robot mapping: dimensions must be positive");
  require((config.input == RobotInput::kRobotOnly) == (aux_dim == 0),
          "robot mapping: aux dim must be zero exactly for robot-only input");
  Rng rng(config.seed);
  RobotInteractionModel m;
  m.config = config;
  m.aux_dim = aux_dim;
  m.latent_dim = latent_dim;
  const std::string prefix(model_kind(config.input));
  m.gru = make_gru(prefix + ".gru", m.input_dim(), config.state_dim, rng);
  m.latent_head = make_gaussian_head(prefix + ".z_head", config.state_dim, config.head_hidden,
                                     latent_dim, config.activation, rng);
  return m;
}

std::vector<ParamTensor*> params_of(RobotInteractionModel& m) {
  std::vector<ParamTensor*> out;
  collect_params(m.gru, out);
  collect_params(m.latent_head, out);
  return out;
}

GaussianBatch robot_latent(const RobotInteractionModel& m, const Mat& h) {
  return gaussian_head_forward(m.latent_head, h);
}

RobotStep robot_advance(const RobotInteractionModel& m, const Mat& h, const Mat& x_r_prev,
                        const Mat& aux_prev) {
  require(h.cols() == m.state_dim(), "robot_advance: h must have state_dim columns");
  require(x_r_prev.cols() == m.robot_dims && aux_prev.cols() == m.aux_dim &&
              aux_prev.rows() == x_r_prev.rows(),
          "robot_advance: input dims mismatch");
  Mat in(x_r_prev.rows(), m.input_dim());
  in << x_r_prev, aux_prev;
  RobotStep s;
  s.h = gru_step(m.gru, h, in);
  s.z = robot_latent(m, s.h);
  return s;
}

Mat robot_aux_sequence(const RobotInteractionModel& m, const RobotContext& ctx,
                       const Mat& human_frames) {
  switch (m.config.input) {
    case RobotInput::kDynamics: {
      require(ctx.human && ctx.dynamics, "robot mapping: dynamics input needs human and dynamics models");
      if (m.config.zero_dynamics) return Mat::Zero(human_frames.rows(), m.aux_dim);
      return extract_dynamics_means(*ctx.dynamics, apply(ctx.human->normalizer, human_frames));
    }
    case RobotInput::kRawHuman:
      require(ctx.human != nullptr, "robot mapping: raw human input needs the human normalizer");
      return apply(ctx.human->normalizer, human_frames);
    case RobotInput::kRobotOnly:
      return Mat(human_frames.rows(), 0);
  }
  return {};
}

namespace {

struct RobotSeq {
  Mat inputs;  // T x input_dim
  GaussianBatch posterior;

  Eigen::Index steps(int w) const { return inputs.rows() - w; }
};

RobotSeq prepare(const RobotInteractionModel& m, const RobotContext& ctx, const InteractionTrial& t) {
  require(t.a2.kind == AgentKind::kRobot, "robot mapping: trial " + t.trial_id + " is not HRI");
  const Mat robot = apply(ctx.robot->normalizer, t.a2.frames);
  RobotSeq s;
  s.inputs.resize(robot.rows(), m.input_dim());
  s.inputs << robot, robot_aux_sequence(m, ctx, t.a1.frames);
  s.posterior = encode(*ctx.robot, extract_windows(robot, {ctx.robot->window(), 1}).data);
  return s;
}

SequenceBatch assemble(const std::vector<const RobotSeq*>& seqs, int w) {
  SequenceBatch b;
  b.agents = 1;
  b.trials = static_cast<Eigen::Index>(seqs.size());
  Eigen::Index steps = 0;
  for (const RobotSeq* s : seqs) steps = std::max(steps, s->steps(w));
  const Eigen::Index in = seqs.front()->inputs.cols();
  const Eigen::Index lat = seqs.front()->posterior.mean.cols();
  for (Eigen::Index k = 0; k < steps; ++k) {
    Mat x = Mat::Zero(b.trials, in), qm = Mat::Zero(b.trials, lat), qv = Mat::Zero(b.trials, lat);
    Mat mask = Mat::Zero(b.trials, 1);
    for (Eigen::Index i = 0; i < b.trials; ++i) {
      const RobotSeq& s = *seqs[static_cast<std::size_t>(i)];
      if (k >= s.steps(w)) continue;
      x.row(i) = s.inputs.row(k);
      qm.row(i) = s.posterior.mean.row(k + 1);
      qv.row(i) = s.posterior.log_var.row(k + 1);
      mask(i, 0) = 1.0;
    }
    b.inputs.push_back(std::move(x));
    b.q_mean.push_back(std::move(qm));
    b.q_log_var.push_back(std::move(qv));
    b.mask.push_back(std::move(mask));
  }
  return b;
}

void check_context(const RobotInteractionModel& m, const RobotContext& ctx) {
  require(ctx.robot != nullptr && ctx.robot->kind == AgentKind::kRobot,
          "robot mapping: needs the robot embedding");
  require(ctx.robot->latent_dim() == m.latent_dim, "robot mapping: latent dim mismatch");
}

}  // namespace

SequenceBatch make_robot_batch(const RobotInteractionModel& m, const RobotContext& ctx,
                               const std::vector<const InteractionTrial*>& trials) {
  check_context(m, ctx);
  std::vector<RobotSeq> seqs;
  for (const InteractionTrial* t : trials) seqs.push_back(prepare(m, ctx, *t));
  std::vector<const RobotSeq*> ptrs;
  for (const auto& s : seqs) ptrs.push_back(&s);
  return assemble(ptrs, ctx.robot->window());
}

namespace ad {

RobotLoss robot_loss(Tape& tape, const RobotInteractionModel& m, const SequenceBatch& batch,
                     std::size_t first, std::size_t count, Var h0) {
  require(first + count <= batch.steps(), "robot_loss: step range out of bounds");
  RobotLoss out;
  out.kl_sum = tape.constant(Mat::Zero(1, 1));
  Var h = h0;
  for (std::size_t s = first; s < first + count; ++s) {
    h = gru_step(m.gru, h, tape.constant(batch.inputs[s]));
    const GaussianVar pz = gaussian_head(m.latent_head, h);
    const GaussianVar q{tape.constant(batch.q_mean[s]), tape.constant(batch.q_log_var[s])};
    out.kl_sum = add(out.kl_sum, sum(mul(kl_diag_gaussian(pz, q), tape.constant(batch.mask[s]))));
    out.valid_steps += batch.mask[s].sum();
  }
  out.h_end = h;
  return out;
}

}  // namespace ad

namespace {

std::vector<RobotSeq> prepare_all(const RobotInteractionModel& m, const RobotContext& ctx,
                                  const std::vector<InteractionTrial>& trials) {
  check_context(m, ctx);
  std::vector<RobotSeq> out;
  for (const auto& t : trials) {
    if (t.length() < ctx.robot->window() + 1) {
      spdlog::warn("robot mapping: skipping trial {} ({} frames)", t.trial_id, t.length());
      continue;
    }
    out.push_back(prepare(m, ctx, t));
  }
  require(!out.empty(), "robot mapping: no trial is long enough");
  return out;
}

std::vector<SequenceBatch> batches_of(const std::vector<RobotSeq>& seqs, int batch_trials, int w) {
  std::vector<std::size_t> idx(seqs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return seqs[a].steps(w) > seqs[b].steps(w); });
  std::vector<SequenceBatch> out;
  for (std::size_t i = 0; i < idx.size(); i += static_cast<std::size_t>(batch_trials)) {
    std::vector<const RobotSeq*> group;
    for (std::size_t k = i; k < std::min(idx.size(), i + static_cast<std::size_t>(batch_trials)); ++k)
      group.push_back(&seqs[idx[k]]);
    out.push_back(assemble(group, w));
  }
  return out;
}

}  // namespace

TrainedRobotMapping train_robot_mapping(const std::vector<InteractionTrial>& hri_trials,
                                        const RobotContext& ctx, const RobotMappingConfig& config) {
  require(config.epochs >= 1 && config.batch_trials >= 1 && config.tbptt >= 1,
          "train_robot_mapping: epochs, batch_trials and tbptt must be positive");
  require(ctx.robot != nullptr, "train_robot_mapping: needs the robot embedding");
  Eigen::Index aux = 0;
  if (config.input == RobotInput::kDynamics) {
    require(ctx.dynamics != nullptr, "train_robot_mapping: needs the dynamics model");
    aux = ctx.dynamics->d_dim();
  } else if (config.input == RobotInput::kRawHuman) {
    require(ctx.human != nullptr, "train_robot_mapping: needs the human normalizer");
    aux = ctx.human->dims;
  }
  TrainedRobotMapping out{make_robot_mapping(config, aux, ctx.robot->latent_dim()), {}, 0};
  RobotInteractionModel& m = out.model;
  std::vector<ParamTensor*> params = params_of(m);
  AdamState adam = make_adam_state(params, {config.learning_rate});
  Rng rng(config.seed ^ 0x94d049bb133111ebull);

  const std::vector<RobotSeq> seqs = prepare_all(m, ctx, hri_trials);
  for (const auto& s : seqs) out.rows_per_epoch += s.steps(ctx.robot->window());
  const std::vector<SequenceBatch> batches = batches_of(seqs, config.batch_trials, ctx.robot->window());

  std::vector<std::size_t> order(batches.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Mat> grads(params.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0, valid_sum = 0.0;
    for (std::size_t bi : order) {
      const SequenceBatch& b = batches[bi];
      Mat h = Mat::Zero(b.rows(), m.state_dim());
      for (std::size_t first = 0; first < b.steps(); first += static_cast<std::size_t>(config.tbptt)) {
        const std::size_t count = std::min(b.steps() - first, static_cast<std::size_t>(config.tbptt));
        try {
          ad::Tape tape;
          const ad::RobotLoss l = ad::robot_loss(tape, m, b, first, count, tape.constant(h));
          const ad::Var loss = ad::scale(l.kl_sum, 1.0 / std::max(1.0, l.valid_steps));
          tape.backward(loss);
          for (std::size_t i = 0; i < params.size(); ++i) grads[i] = tape.param_grad(*params[i]);
          if (config.grad_clip > 0.0) clip_grad_norm(grads, config.grad_clip);
          adam_step(adam, params, grads);
          loss_sum += l.kl_sum.value()(0, 0);
          valid_sum += l.valid_steps;
          h = l.h_end.value();
        } catch (const NumericError& e) {
          throw NumericError("robot mapping training diverged at epoch " + std::to_string(epoch + 1) +
                             ": " + e.what());
        }
      }
    }
    out.loss_trace.push_back(loss_sum / std::max(1.0, valid_sum));
  }
  return out;
}

double evaluate_robot_mapping(const RobotInteractionModel& m, const RobotContext& ctx,
                              const std::vector<InteractionTrial>& trials) {
  const std::vector<RobotSeq> seqs = prepare_all(m, ctx, trials);
  double kl = 0.0, valid = 0.0;
  for (const SequenceBatch& b : batches_of(seqs, m.config.batch_trials, ctx.robot->window())) {
    ad::Tape tape;
    const auto l = ad::robot_loss(tape, m, b, 0, b.steps(),
                                  tape.constant(Mat::Zero(b.rows(), m.state_dim())));
    kl += l.kl_sum.value()(0, 0);
    valid += l.valid_steps;
  }
  return kl / valid;
}

Mat robot_latent_means(const RobotInteractionModel& m, const RobotContext& ctx,
                       const InteractionTrial& trial) {
  check_context(m, ctx);
  const Mat robot = apply(ctx.robot->normalizer, trial.a2.frames);
  const Mat aux = robot_aux_sequence(m, ctx, trial.a1.frames);
  Mat out(robot.rows(), m.latent_dim);
  Mat h = Mat::Zero(1, m.state_dim());
  for (Eigen::Index t = 0; t < robot.rows(); ++t) {
    if (t > 0) h = robot_advance(m, h, robot.row(t - 1), aux.row(t - 1)).h;
    out.row(t) = robot_latent(m, h).mean;
  }
  return out;
}

Checkpoint to_checkpoint(const RobotInteractionModel& m, const std::string& config_hash) {
  Checkpoint c;
  c.model_kind = std::string(model_kind(m.config.input));
  c.config = to_json(m.config);
  c.extra = {{"aux_dim", m.aux_dim}, {"latent_dim", m.latent_dim}};
  c.config_hash = config_hash;
  RobotInteractionModel copy = m;
  c.tensors = snapshot_params(params_of(copy));
  return c;
}

RobotInteractionModel robot_mapping_from_checkpoint(const Checkpoint& ckpt) {
  try {
    const RobotMappingConfig cfg = robot_mapping_config_from_json(ckpt.config);
    if (model_kind(cfg.input) != ckpt.model_kind)
      throw FormatError("robot checkpoint kind '" + ckpt.model_kind + "' disagrees with its config");
    RobotInteractionModel m = make_robot_mapping(cfg, ckpt.extra.at("aux_dim").get<Eigen::Index>(),
                                                 ckpt.extra.at("latent_dim").get<int>());
    restore_params(ckpt, params_of(m));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("robot checkpoint: ") + e.what());
  } catch (const ContractError& e) {
    throw FormatError(std::string("robot checkpoint: ") + e.what());
  }
}

}  // namespace hme
