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

#include "hme/model/dynamics.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hme/errors.hpp"
#include "hme/nn/adam.hpp"
#include "hme/nn/ops.hpp"

namespace hme {

nlohmann::json to_json(const DynamicsConfig& c) {
  return {{"state_dim", c.state_dim},
          {"d_dim", c.d_dim},
          {"head_hidden", c.head_hidden},
          {"activation", to_string(c.activation)},
          {"epochs", c.epochs},
          {"batch_trials", c.batch_trials},
          {"tbptt", c.tbptt},
          {"learning_rate", c.learning_rate},
          {"jsd_weight", c.jsd_weight},
          {"jsd_samples", c.jsd_samples},
          {"reverse_kl", c.reverse_kl},
          {"grad_clip", c.grad_clip},
          {"seed", c.seed}};
}

DynamicsConfig dynamics_config_from_json(const nlohmann::json& j) {
  DynamicsConfig c;
  c.state_dim = j.at("state_dim").get<int>();
  c.d_dim = j.at("d_dim").get<int>();
  c.head_hidden = j.at("head_hidden").get<std::vector<int>>();
  c.activation = activation_from_string(j.at("activation").get<std::string>());
  c.epochs = j.at("epochs").get<int>();
  c.batch_trials = j.at("batch_trials").get<int>();
  c.tbptt = j.at("tbptt").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.jsd_weight = j.at("jsd_weight").get<double>();
  c.jsd_samples = j.at("jsd_samples").get<int>();
  c.reverse_kl = j.at("reverse_kl").get<bool>();
  c.grad_clip = j.at("grad_clip").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

DynamicsModel make_dynamics(const DynamicsConfig& config, Eigen::Index input_dim, int latent_dim) {
  require(config.state_dim >= 1 && config.d_dim >= 1 && input_dim >= 1 && latent_dim >= 1,
          "dynamics: dimensions must be positive");
  Rng rng(config.seed);
  DynamicsModel m;
  m.config = config;
  m.input_dim = input_dim;
  m.latent_dim = latent_dim;
  m.gru = make_gru("dynamics.gru", input_dim, config.state_dim, rng);
  m.dynamics_head = make_gaussian_head("dynamics.d_head", config.state_dim, config.head_hidden,
                                       config.d_dim, config.activation, rng);
  m.latent_head = make_gaussian_head("dynamics.z_head", config.d_dim, config.head_hidden,
                                     latent_dim, config.activation, rng);
  return m;
}

std::vector<ParamTensor*> params_of(DynamicsModel& m) {
  std::vector<ParamTensor*> out;
  collect_params(m.gru, out);
  collect_params(m.dynamics_head, out);
  collect_params(m.latent_head, out);
  return out;
}

GaussianBatch dynamics_dist(const DynamicsModel& m, const Mat& h) {
  return gaussian_head_forward(m.dynamics_head, h);
}

DynamicsStep advance(const DynamicsModel& m, const Mat& h, const Mat& x_prev) {
  require(h.cols() == m.state_dim(), "advance: h must have state_dim columns");
  require(x_prev.cols() == m.input_dim, "advance: frame dims mismatch");
  DynamicsStep s;
  s.h = gru_step(m.gru, h, x_prev);
  s.d = dynamics_dist(m, s.h);
  return s;
}

GaussianBatch latent_from_dynamics(const DynamicsModel& m, const Mat& d) {
  require(d.cols() == m.d_dim(), "latent_from_dynamics: d must have d_dim columns");
  return gaussian_head_forward(m.latent_head, d);
}

GaussianParams latent_from_dynamics(const DynamicsModel& m, const Vec& d) {
  return latent_from_dynamics(m, Mat(d.transpose())).row(0);
}

Mat extract_dynamics_means(const DynamicsModel& m, const Mat& x) {
  require(x.cols() == m.input_dim, "extract_dynamics_means: frame dims mismatch");
  Mat out(x.rows(), m.d_dim());
  Mat h = Mat::Zero(1, m.state_dim());
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    if (t > 0) h = gru_step(m.gru, h, x.row(t - 1));
    out.row(t) = dynamics_dist(m, h).mean;
  }
  return out;
}

namespace {

// Normalized frames and window posteriors of each contributing stream.
struct TrialSeq {
  std::vector<Mat> frames;
  std::vector<GaussianBatch> posterior;  // rows: window start 0 .. T - w

  Eigen::Index steps(int w) const { return frames.front().rows() - w; }
};

TrialSeq prepare(const InteractionTrial& t, const EmbeddingModel& emb) {
  TrialSeq s;
  auto add = [&](const AgentStream& a) {
    s.frames.push_back(apply(emb.normalizer, a.frames));
    s.posterior.push_back(encode(emb, extract_windows(s.frames.back(), {emb.window(), 1}).data));
  };
  add(t.a1);
  if (t.a2.kind == AgentKind::kHuman) add(t.a2);
  return s;
}

SequenceBatch assemble(const std::vector<const TrialSeq*>& seqs, int w) {
  require(!seqs.empty(), "dynamics batch: no trials");
  SequenceBatch b;
  b.agents = static_cast<int>(seqs.front()->frames.size());
  b.trials = static_cast<Eigen::Index>(seqs.size());
  Eigen::Index steps = 0;
  for (const TrialSeq* s : seqs) {
    require(static_cast<int>(s->frames.size()) == b.agents,
            "dynamics batch: trials contribute different numbers of streams");
    steps = std::max(steps, s->steps(w));
  }
  const Eigen::Index rows = b.rows();
  const Eigen::Index in = seqs.front()->frames.front().cols();
  const Eigen::Index lat = seqs.front()->posterior.front().mean.cols();
  for (Eigen::Index k = 0; k < steps; ++k) {
    Mat x = Mat::Zero(rows, in), qm = Mat::Zero(rows, lat), qv = Mat::Zero(rows, lat);
    Mat mask = Mat::Zero(rows, 1);
    for (int a = 0; a < b.agents; ++a) {
      for (Eigen::Index i = 0; i < b.trials; ++i) {
        const TrialSeq& s = *seqs[static_cast<std::size_t>(i)];
        if (k >= s.steps(w)) continue;
        const Eigen::Index r = a * b.trials + i;
        x.row(r) = s.frames[static_cast<std::size_t>(a)].row(k);
        qm.row(r) = s.posterior[static_cast<std::size_t>(a)].mean.row(k + 1);
        qv.row(r) = s.posterior[static_cast<std::size_t>(a)].log_var.row(k + 1);
        mask(r, 0) = 1.0;
      }
    }
    b.inputs.push_back(std::move(x));
    b.q_mean.push_back(std::move(qm));
    b.q_log_var.push_back(std::move(qv));
    b.mask.push_back(std::move(mask));
  }
  return b;
}

std::vector<TrialSeq> prepare_all(const std::vector<InteractionTrial>& trials,
                                  const EmbeddingModel& emb) {
  std::vector<TrialSeq> out;
  for (const auto& t : trials) {
    if (t.length() < emb.window() + 1) {
      spdlog::warn("dynamics: skipping trial {} ({} frames, need {})", t.trial_id, t.length(),
                   emb.window() + 1);
      continue;
    }
    out.push_back(prepare(t, emb));
  }
  require(!out.empty(), "dynamics: no trial is long enough for training");
  return out;
}

// Consecutive batches of trials sorted by length, so padding stays small.
std::vector<std::vector<const TrialSeq*>> make_batches(const std::vector<TrialSeq>& seqs,
                                                       int batch_trials, int w) {
  std::vector<std::size_t> idx(seqs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return seqs[a].steps(w) > seqs[b].steps(w); });
  std::vector<std::vector<const TrialSeq*>> out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i % static_cast<std::size_t>(batch_trials) == 0) out.emplace_back();
    out.back().push_back(&seqs[idx[i]]);
  }
  return out;
}

}  // namespace

SequenceBatch make_dynamics_batch(const std::vector<const InteractionTrial*>& trials,
                                  const EmbeddingModel& embedding) {
  std::vector<TrialSeq> seqs;
  for (const InteractionTrial* t : trials) {
    require(t->length() >= embedding.window() + 1, "dynamics batch: trial shorter than w + 1");
    seqs.push_back(prepare(*t, embedding));
  }
  std::vector<const TrialSeq*> ptrs;
  for (const auto& s : seqs) ptrs.push_back(&s);
  return assemble(ptrs, embedding.window());
}

DynamicsNoise make_dynamics_noise(const DynamicsModel& m, const SequenceBatch& batch,
                                  std::size_t first, std::size_t count, Rng& rng) {
  DynamicsNoise n;
  for (std::size_t s = first; s < first + count; ++s) {
    n.d.push_back(standard_normal(batch.rows(), m.d_dim(), rng));
    if (batch.agents == 2)
      n.jsd.push_back(make_jsd_noise(batch.trials, m.d_dim(), m.config.jsd_samples, rng));
  }
  return n;
}

namespace ad {

DynamicsLoss dynamics_loss(Tape& tape, const DynamicsModel& m, const SequenceBatch& batch,
                           std::size_t first, std::size_t count, Var h0,
                           const DynamicsNoise& noise) {
  require(first + count <= batch.steps(), "dynamics_loss: step range out of bounds");
  require(batch.agents == 1 || batch.agents == 2, "dynamics_loss: one or two agents");
  const Eigen::Index n = batch.trials;
  DynamicsLoss out;
  out.kl_sum = tape.constant(Mat::Zero(1, 1));
  out.jsd_sum = tape.constant(Mat::Zero(1, 1));
  Var h = h0;
  for (std::size_t s = first; s < first + count; ++s) {
    const std::size_t k = s - first;
    h = gru_step(m.gru, h, tape.constant(batch.inputs[s]));
    const GaussianVar d = gaussian_head(m.dynamics_head, h);
    const Var d_sample = reparameterize(d, tape.constant(noise.d[k]));
    const GaussianVar pz = gaussian_head(m.latent_head, d_sample);
    const GaussianVar q{tape.constant(batch.q_mean[s]), tape.constant(batch.q_log_var[s])};
    const Var kl = m.config.reverse_kl ? kl_diag_gaussian(q, pz) : kl_diag_gaussian(pz, q);
    const Var mask = tape.constant(batch.mask[s]);
    out.kl_sum = add(out.kl_sum, sum(mul(kl, mask)));
    if (batch.agents == 2) {
      const GaussianVar p1{slice_rows(d.mean, 0, n), slice_rows(d.log_var, 0, n)};
      const GaussianVar p2{slice_rows(d.mean, n, n), slice_rows(d.log_var, n, n)};
      const Var jsd = jsd_mc(p1, p2, noise.jsd[k]);
      out.jsd_sum = add(out.jsd_sum, sum(mul(jsd, slice_rows(mask, 0, n))));
    }
    out.valid_steps += batch.mask[s].topRows(n).sum();
  }
  out.h_end = h;
  return out;
}

}  // namespace ad

TrainedDynamics train_dynamics(const std::vector<InteractionTrial>& trials,
                               const EmbeddingModel& embedding, const DynamicsConfig& config) {
  require(embedding.kind == AgentKind::kHuman, "train_dynamics: needs the human embedding");
  require(config.epochs >= 1 && config.batch_trials >= 1 && config.tbptt >= 1,
          "train_dynamics: epochs, batch_trials and tbptt must be positive");
  TrainedDynamics out{make_dynamics(config, embedding.dims, embedding.latent_dim()), {}};
  DynamicsModel& m = out.model;
  std::vector<ParamTensor*> params = params_of(m);
  AdamState adam = make_adam_state(params, {config.learning_rate});
  Rng rng(config.seed ^ 0xd1b54a32d192ed03ull);

  const std::vector<TrialSeq> seqs = prepare_all(trials, embedding);
  const auto groups = make_batches(seqs, config.batch_trials, embedding.window());
  std::vector<SequenceBatch> batches;
  for (const auto& g : groups) batches.push_back(assemble(g, embedding.window()));

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
        const DynamicsNoise noise = make_dynamics_noise(m, b, first, count, rng);
        try {
          ad::Tape tape;
          const ad::DynamicsLoss l = ad::dynamics_loss(tape, m, b, first, count, tape.constant(h), noise);
          const ad::Var total = ad::add(l.kl_sum, ad::scale(l.jsd_sum, config.jsd_weight));
          const ad::Var loss = ad::scale(total, 1.0 / std::max(1.0, l.valid_steps));
          tape.backward(loss);
          for (std::size_t i = 0; i < params.size(); ++i) grads[i] = tape.param_grad(*params[i]);
          if (config.grad_clip > 0.0) clip_grad_norm(grads, config.grad_clip);
          adam_step(adam, params, grads);
          loss_sum += total.value()(0, 0);
          valid_sum += l.valid_steps;
          h = l.h_end.value();
        } catch (const NumericError& e) {
          throw NumericError("dynamics training diverged at epoch " + std::to_string(epoch + 1) +
                             ": " + e.what());
        }
      }
    }
    out.loss_trace.push_back(loss_sum / std::max(1.0, valid_sum));
  }
  return out;
}

DynamicsEval evaluate_dynamics(const DynamicsModel& m, const std::vector<InteractionTrial>& trials,
                               const EmbeddingModel& embedding, std::uint64_t noise_seed) {
  const std::vector<TrialSeq> seqs = prepare_all(trials, embedding);
  Rng rng(noise_seed);
  double kl = 0.0, jsd = 0.0, valid = 0.0, agents = 1.0;
  for (const auto& g : make_batches(seqs, m.config.batch_trials, embedding.window())) {
    const SequenceBatch b = assemble(g, embedding.window());
    const DynamicsNoise noise = make_dynamics_noise(m, b, 0, b.steps(), rng);
    ad::Tape tape;
    const auto l = ad::dynamics_loss(tape, m, b, 0, b.steps(),
                                     tape.constant(Mat::Zero(b.rows(), m.state_dim())), noise);
    kl += l.kl_sum.value()(0, 0);
    jsd += l.jsd_sum.value()(0, 0);
    valid += l.valid_steps;
    agents = b.agents;
  }
  return {kl / (valid * agents), jsd / valid};
}

Checkpoint to_checkpoint(const DynamicsModel& m, const std::string& config_hash) {
  Checkpoint c;
  c.model_kind = "dynamics-hhi";
  c.config = to_json(m.config);
  c.extra = {{"input_dim", m.input_dim}, {"latent_dim", m.latent_dim}};
  c.config_hash = config_hash;
  DynamicsModel copy = m;
  c.tensors = snapshot_params(params_of(copy));
  return c;
}

DynamicsModel dynamics_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.model_kind != "dynamics-hhi")
    throw FormatError("expected a dynamics checkpoint, got '" + ckpt.model_kind + "'");
  try {
    DynamicsModel m = make_dynamics(dynamics_config_from_json(ckpt.config),
                                    ckpt.extra.at("input_dim").get<Eigen::Index>(),
                                    ckpt.extra.at("latent_dim").get<int>());
    restore_params(ckpt, params_of(m));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dynamics checkpoint: ") + e.what());
  }
}

}  // namespace hme
