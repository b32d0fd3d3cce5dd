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
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hme/data/preprocess.hpp"
#include "hme/data/trial.hpp"
#include "hme/io/checkpoint.hpp"
#include "hme/nn/layers.hpp"

namespace hme {

struct EmbeddingConfig {
  int latent_dim = 8;
  std::vector<int> hidden = {64};
  Activation activation = Activation::kTanh;
  int window = 40;
  int train_stride = 4;
  int epochs = 20;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double kl_weight = 1.0;
  int kl_warmup_epochs = 0;
  double grad_clip = 0.0;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const EmbeddingConfig& c);
EmbeddingConfig embedding_config_from_json(const nlohmann::json& j);

// Windowed VAE over one agent kind. Windows are normalized and flattened
// frame-major; the prior over z is N(0, I).
struct EmbeddingModel {
  AgentKind kind = AgentKind::kHuman;
  Eigen::Index dims = 0;
  EmbeddingConfig config;
  Normalizer normalizer;
  std::string joint_subset;  // human models only
  GaussianHead encoder;
  GaussianHead decoder;

  int window() const { return config.window; }
  int latent_dim() const { return config.latent_dim; }
  Eigen::Index flat_dim() const { return dims * config.window; }
};

EmbeddingModel make_embedding(const EmbeddingConfig& config, AgentKind kind, Eigen::Index dims,
                              Normalizer normalizer);
std::vector<ParamTensor*> params_of(EmbeddingModel& m);

GaussianBatch encode(const EmbeddingModel& m, const Mat& windows);
GaussianParams encode(const EmbeddingModel& m, const RowVec& window);
GaussianBatch decode(const EmbeddingModel& m, const Mat& z);
GaussianParams decode(const EmbeddingModel& m, const Vec& z);

struct ElboParts {
  double elbo = 0.0;
  double loglik = 0.0;
  double kl = 0.0;
};

// Single Monte-Carlo sample with the given standard-normal `noise`.
ElboParts elbo(const EmbeddingModel& m, const RowVec& window, const Vec& noise);

namespace ad {
struct ElboTerms {
  Var loglik;  // rows x 1
  Var kl;      // rows x 1
};
ElboTerms elbo_terms(Tape& tape, const EmbeddingModel& m, const Mat& windows, const Mat& noise);
}  // namespace ad

// Normalized, flattened windows from every stream of `kind` in `trials`.
Mat training_windows(const std::vector<InteractionTrial>& trials, AgentKind kind,
                     const Normalizer& normalizer, const WindowSpec& spec);

struct TrainedEmbedding {
  EmbeddingModel model;
  std::vector<double> loss_trace;  // per-epoch mean of -(loglik - beta * kl)
  std::vector<double> elbo_trace;  // per-epoch mean ELBO
};

// Minibatch Adam on -ELBO. Throws NumericError naming the epoch on divergence.
TrainedEmbedding train_embedding(const Mat& windows, const EmbeddingConfig& config,
                                 AgentKind kind, Eigen::Index dims, Normalizer normalizer);

// RMSE of decode(encode(x).mean).mean against x, normalized units.
double reconstruction_rmse(const EmbeddingModel& m, const Mat& windows);

Checkpoint to_checkpoint(const EmbeddingModel& m, const std::string& config_hash);
EmbeddingModel embedding_from_checkpoint(const Checkpoint& ckpt);

}  // namespace hme
