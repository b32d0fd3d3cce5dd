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

#include <vector>

#include "hme/data/synth.hpp"
#include "hme/data/split.hpp"
#include "hme/model/dynamics.hpp"
#include "hme/model/embedding.hpp"
#include "hme/model/robot_mapping.hpp"

namespace hme::testing {

// Small synthetic hand-shake corpus with briefly trained models, built once per binary.
struct TinyWorld {
  TrialSplit hhi;
  TrialSplit hri;
  EmbeddingModel human;
  EmbeddingModel robot;
  DynamicsModel dynamics;
  DynamicsConfig dynamics_config;
  std::vector<double> dynamics_trace;
};

inline const TinyWorld& tiny_world() {
  static const TinyWorld world = [] {
    TinyWorld w;
    SynthConfig hhi = default_hhi_config();
    SynthConfig hri = default_hri_config();
    for (Action a : kAllActions) hhi[a].trials = hri[a].trials = 0;
    hhi[Action::kHandShake].trials = 16;
    hri[Action::kHandShake].trials = 6;
    hhi.seed = hri.seed = 5;
    w.hhi = split_trials(synth_generate_hhi(hhi), 0.25, 1);
    w.hri = split_trials(synth_generate_hri(hri), 0.34, 1);

    EmbeddingConfig ec;
    ec.latent_dim = 8;
    ec.hidden = {64};
    ec.activation = Activation::kRelu;
    ec.window = 40;
    ec.train_stride = 4;
    ec.epochs = 12;
    ec.batch_size = 32;
    ec.learning_rate = 2e-3;
    ec.seed = 21;
    const WindowSpec spec{ec.window, ec.train_stride};
    const Normalizer hn = fit_normalizer(w.hhi.train, AgentKind::kHuman);
    w.human = train_embedding(training_windows(w.hhi.train, AgentKind::kHuman, hn, spec), ec,
                              AgentKind::kHuman, hn.dims(), hn)
                  .model;
    const Normalizer rn = fit_normalizer(w.hri.train, AgentKind::kRobot);
    ec.seed = 22;
    ec.epochs = 20;
    w.robot = train_embedding(training_windows(w.hri.train, AgentKind::kRobot, rn, spec), ec,
                              AgentKind::kRobot, rn.dims(), rn)
                  .model;

    DynamicsConfig dc;
    dc.state_dim = 32;
    dc.d_dim = 8;
    dc.epochs = 12;
    dc.batch_trials = 4;
    dc.learning_rate = 3e-3;
    dc.seed = 23;
    w.dynamics_config = dc;
    TrainedDynamics td = train_dynamics(w.hhi.train, w.human, dc);
    w.dynamics = std::move(td.model);
    w.dynamics_trace = std::move(td.loss_trace);
    return w;
  }();
  return world;
}

}  // namespace hme::testing
