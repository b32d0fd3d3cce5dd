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

#include "hme/model/embedding.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "hme/errors.hpp"
#include "hme/nn/adam.hpp"
#include "hme/nn/ops.hpp"

namespace hme {

nlohmann::json to_json(const EmbeddingConfig& c) {
  return {{"latent_dim", c.latent_dim},
          {"hidden", c.hidden},
          {"activation", to_string(c.activation)},
          {"window", c.window},
          {"train_stride", c.train_stride},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"kl_weight", c.kl_weight},
          {"kl_warmup_epochs", c.kl_warmup_epochs},
          {"grad_clip", c.grad_clip},
          {"seed", c.seed}};
}

EmbeddingConfig embedding_config_from_json(const nlohmann::json& j) {
  EmbeddingConfig c;
  c.latent_dim = j.at("latent_dim").get<int>();
  c.hidden = j.at("hidden").get<std::vector<int>>();
  c.activation = activation_from_string(j.at("activation").get<std::string>());
  c.window = j.at("window").get<int>();
  c.train_stride = j.at("train_stride").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.kl_weight = j.at("kl_weight").get<double>();
  c.kl_warmup_epochs = j.at("kl_warmup_epochs").get<int>();
  c.grad_clip = j.at("grad_clip").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

EmbeddingModel make_embedding(const EmbeddingConfig& config, AgentKind kind, Eigen::Index dims,
                              Normalizer normalizer) {
  require(config.latent_dim >= 1 && config.window >= 1 && dims >= 1,
          "embedding: latent_dim, window and dims must be positive");
  require(normalizer.dims() == dims, "embedding: normalizer dims mismatch");
  Rng rng(config.seed);
  EmbeddingModel m;
  m.kind = kind;
  m.dims = dims;
  m.config = config;
  m.normalizer = std::move(normalizer);
  const std::string prefix = kind == AgentKind::kHuman ? "human" : "robot";
  m.encoder = make_gaussian_head(prefix + ".encoder", m.flat_dim(), config.hidden,
                                 config.latent_dim, config.activation, rng);
  std::vector<int> rev(config.hidden.rbegin(), config.hidden.rend());
  m.decoder = make_gaussian_head(prefix + ".decoder", config.latent_dim, rev, m.flat_dim(),
                                 config.activation, rng);
  return m;
}

std::vector<ParamTensor*> params_of(EmbeddingModel& m) {
  std::vector<ParamTensor*> out;
  collect_params(m.encoder, out);
  collect_params(m.decoder, out);
  return out;
}

GaussianBatch encode(const EmbeddingModel& m, const Mat& windows) {
  require(windows.cols() == m.flat_dim(), "encode: window length must be w * dims");
  return gaussian_head_forward(m.encoder, windows);
}

GaussianParams encode(const EmbeddingModel& m, const RowVec& window) {
  return encode(m, Mat(window)).row(0);
}

GaussianBatch decode(const EmbeddingModel& m, const Mat& z) {
  require(z.cols() == m.latent_dim(), "decode: z length must equal latent_dim");
  return gaussian_head_forward(m.decoder, z);
}

GaussianParams decode(const EmbeddingModel& m, const Vec& z) {
  return decode(m, Mat(z.transpose())).row(0);
}

namespace ad {

ElboTerms elbo_terms(Tape& tape, const EmbeddingModel& m, const Mat& windows, const Mat& noise) {
  require(windows.cols() == m.flat_dim(), "elbo: window length must be w * dims");
  require(noise.rows() == windows.rows() && noise.cols() == m.latent_dim(),
          "elbo: noise must be rows x latent_dim");
  const Var x = tape.constant(windows);
  const GaussianVar q = gaussian_head(m.encoder, x);
  const Var z = reparameterize(q, tape.constant(noise));
  const GaussianVar px = gaussian_head(m.decoder, z);
  const GaussianVar prior{tape.constant(Mat::Zero(noise.rows(), noise.cols())),
                          tape.constant(Mat::Zero(noise.rows(), noise.cols()))};
  return {gaussian_loglik(x, px), kl_diag_gaussian(q, prior)};
}

}  // namespace ad

ElboParts elbo(const EmbeddingModel& m, const RowVec& window, const Vec& noise) {
  ad::Tape tape;
  const auto terms = ad::elbo_terms(tape, m, Mat(window), Mat(noise.transpose()));
  ElboParts p;
  p.loglik = terms.loglik.value()(0, 0);
  p.kl = terms.kl.value()(0, 0);
  p.elbo = p.loglik - p.kl;
  return p;
}

Mat training_windows(const std::vector<InteractionTrial>& trials, AgentKind kind,
                     const Normalizer& normalizer, const WindowSpec& spec) {
  std::vector<Mat> blocks;
  Eigen::Index rows = 0;
  auto add = [&](const AgentStream& s) {
    if (s.kind != kind || s.length() < spec.w) return;
    blocks.push_back(extract_windows(apply(normalizer, s.frames), spec).data);
    rows += blocks.back().rows();
  };
  for (const auto& t : trials) {
    add(t.a1);
    add(t.a2);
  }
  require(rows > 0, "training_windows: no stream is long enough for one window");
  Mat out(rows, blocks.front().cols());
  Eigen::Index r = 0;
  for (const Mat& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

TrainedEmbedding train_embedding(const Mat& windows, const EmbeddingConfig& config,
                                 AgentKind kind, Eigen::Index dims, Normalizer normalizer) {
  require(windows.rows() >= 1, "train_embedding: no windows");
  require(config.epochs >= 1 && config.batch_size >= 1, "train_embedding: epochs and batch size must be positive");
  TrainedEmbedding out{make_embedding(config, kind, dims, std::move(normalizer)), {}, {}};
  EmbeddingModel& m = out.model;
  std::vector<ParamTensor*> params = params_of(m);
  AdamState adam = make_adam_state(params, {config.learning_rate});
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ull);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(windows.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::vector<Mat> grads(params.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double beta =
        config.kl_weight * (config.kl_warmup_epochs > 0
                                ? std::min(1.0, static_cast<double>(epoch + 1) / config.kl_warmup_epochs)
                                : 1.0);
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0, elbo_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t n = std::min(order.size() - start, static_cast<std::size_t>(config.batch_size));
      Mat batch(static_cast<Eigen::Index>(n), windows.cols());
      for (std::size_t i = 0; i < n; ++i) batch.row(static_cast<Eigen::Index>(i)) = windows.row(order[start + i]);
      const Mat noise = standard_normal(batch.rows(), config.latent_dim, rng);
      try {
        ad::Tape tape;
        const auto terms = ad::elbo_terms(tape, m, batch, noise);
        const ad::Var per_row = ad::sub(ad::scale(terms.kl, beta), terms.loglik);
        const ad::Var loss = ad::mean(per_row);
        tape.backward(loss);
        for (std::size_t i = 0; i < params.size(); ++i) grads[i] = tape.param_grad(*params[i]);
        if (config.grad_clip > 0.0) clip_grad_norm(grads, config.grad_clip);
        adam_step(adam, params, grads);
        loss_sum += loss.value()(0, 0) * static_cast<double>(n);
        elbo_sum += (terms.loglik.value() - terms.kl.value()).sum();
      } catch (const NumericError& e) {
        throw NumericError("embedding training diverged at epoch " + std::to_string(epoch + 1) +
                           ": " + e.what());
      }
    }
    out.loss_trace.push_back(loss_sum / static_cast<double>(order.size()));
    out.elbo_trace.push_back(elbo_sum / static_cast<double>(order.size()));
  }
  return out;
}

double reconstruction_rmse(const EmbeddingModel& m, const Mat& windows) {
  const Mat recon = decode(m, encode(m, windows).mean).mean;
  return std::sqrt((recon - windows).squaredNorm() / static_cast<double>(windows.size()));
}

Checkpoint to_checkpoint(const EmbeddingModel& m, const std::string& config_hash) {
  Checkpoint c;
  c.model_kind = m.kind == AgentKind::kHuman ? "embedding-human" : "embedding-robot";
  c.config = to_json(m.config);
  c.normalizer = normalizer_to_json(m.normalizer);
  c.extra = {{"dims", m.dims}, {"joint_subset", m.joint_subset}};
  c.config_hash = config_hash;
  EmbeddingModel copy = m;
  c.tensors = snapshot_params(params_of(copy));
  return c;
}

EmbeddingModel embedding_from_checkpoint(const Checkpoint& ckpt) {
  AgentKind kind;
  if (ckpt.model_kind == "embedding-human") {
    kind = AgentKind::kHuman;
  } else if (ckpt.model_kind == "embedding-robot") {
    kind = AgentKind::kRobot;
  } else {
    throw FormatError("expected an embedding checkpoint, got '" + ckpt.model_kind + "'");
  }
  try {
    EmbeddingModel m = make_embedding(embedding_config_from_json(ckpt.config), kind,
                                      ckpt.extra.at("dims").get<Eigen::Index>(),
                                      normalizer_from_json(ckpt.normalizer));
    m.joint_subset = ckpt.extra.at("joint_subset").get<std::string>();
    restore_params(ckpt, params_of(m));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("embedding checkpoint: ") + e.what());
  }
}

}  // namespace hme
