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

#include <string>
#include <string_view>
#include <vector>

#include "hme/nn/autodiff.hpp"
#include "hme/nn/gaussian.hpp"
#include "hme/nn/tensor.hpp"

namespace hme {

enum class Activation { kIdentity, kTanh, kRelu };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

// y = act(W x + b), W is [out, in].
struct Dense {
  ParamTensor weight;
  ParamTensor bias;
  Activation activation = Activation::kIdentity;

  Eigen::Index in_dim() const { return weight.value.cols(); }
  Eigen::Index out_dim() const { return weight.value.rows(); }
};

// Glorot-uniform weights, zero bias.
Dense make_dense(const std::string& name, Eigen::Index in, Eigen::Index out, Activation act,
                 Rng& rng);

// Batched over rows of `input`.
Mat dense_forward(const Dense& layer, const Mat& input);
Vec dense_forward(const Dense& layer, const Vec& input);

// Stack of Dense layers; the last one is always linear.
struct Mlp {
  std::vector<Dense> layers;

  Eigen::Index in_dim() const { return layers.front().in_dim(); }
  Eigen::Index out_dim() const { return layers.back().out_dim(); }
};

Mlp make_mlp(const std::string& name, Eigen::Index in, const std::vector<int>& hidden,
             Eigen::Index out, Activation hidden_act, Rng& rng);
Mat mlp_forward(const Mlp& net, const Mat& input);

// Mlp whose output splits into (mean, clamped log_var) halves.
struct GaussianHead {
  Mlp net;

  Eigen::Index in_dim() const { return net.in_dim(); }
  Eigen::Index dim() const { return net.out_dim() / 2; }
};

GaussianHead make_gaussian_head(const std::string& name, Eigen::Index in,
                                const std::vector<int>& hidden, Eigen::Index dim,
                                Activation hidden_act, Rng& rng);

struct GaussianBatch {
  Mat mean;
  Mat log_var;

  GaussianParams row(Eigen::Index r) const;
};

GaussianBatch gaussian_head_forward(const GaussianHead& head, const Mat& input);
GaussianParams gaussian_head_forward(const GaussianHead& head, const Vec& input);

// Single-layer GRU, gate order [reset, update, candidate]:
//   r = sig(W_ir x + b_ir + W_hr h + b_hr)
//   z = sig(W_iz x + b_iz + W_hz h + b_hz)
//   n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
//   h' = (1 - z) * n + z * h
struct Gru {
  ParamTensor w_input;   // [3H, I]
  ParamTensor w_hidden;  // [3H, H]
  ParamTensor b_input;   // [1, 3H]
  ParamTensor b_hidden;  // [1, 3H]

  Eigen::Index input_dim() const { return w_input.value.cols(); }
  Eigen::Index state_dim() const { return w_hidden.value.cols(); }
};

Gru make_gru(const std::string& name, Eigen::Index input_dim, Eigen::Index state_dim, Rng& rng);

Mat gru_step(const Gru& cell, const Mat& h, const Mat& x);
Vec gru_step(const Gru& cell, const Vec& h, const Vec& x);

// Parameter enumeration in a fixed order (used by Adam and checkpoints).
void collect_params(Dense& layer, std::vector<ParamTensor*>& out);
void collect_params(Mlp& net, std::vector<ParamTensor*>& out);
void collect_params(GaussianHead& head, std::vector<ParamTensor*>& out);
void collect_params(Gru& cell, std::vector<ParamTensor*>& out);

namespace ad {

Var dense(const Dense& layer, Var input);
Var mlp(const Mlp& net, Var input);
GaussianVar gaussian_head(const GaussianHead& head, Var input);
Var gru_step(const Gru& cell, Var h, Var x);

}  // namespace ad
}  // namespace hme
