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

#include "hme/nn/layers.hpp"

#include <cmath>

#include "hme/errors.hpp"
#include "hme/nn/ops.hpp"

namespace hme {
namespace {

Mat glorot_uniform(Eigen::Index out, Eigen::Index in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Mat w(out, in);
  for (Eigen::Index r = 0; r < out; ++r)
    for (Eigen::Index c = 0; c < in; ++c) w(r, c) = dist(rng);
  return w;
}

Mat activate(Activation act, Mat pre) {
  switch (act) {
    case Activation::kIdentity:
      return pre;
    case Activation::kTanh:
      return pre.array().tanh().matrix();
    case Activation::kRelu:
      return pre.cwiseMax(0.0);
  }
  return pre;
}

Mat sigmoid(const Mat& a) { return (1.0 / (1.0 + (-a.array()).exp())).matrix(); }

struct GruGates {
  Mat r, z, n, hn;
  Mat h_next;
};

GruGates gru_gates(const Gru& cell, const Mat& h, const Mat& x) {
  require(x.cols() == cell.input_dim(), "gru_step: input dimension mismatch");
  require(h.cols() == cell.state_dim(), "gru_step: state dimension mismatch");
  require(h.rows() == x.rows(), "gru_step: batch size mismatch");
  const Eigen::Index hd = cell.state_dim();
  Mat gi = x * cell.w_input.value.transpose();
  gi.rowwise() += cell.b_input.value.row(0);
  Mat gh = h * cell.w_hidden.value.transpose();
  gh.rowwise() += cell.b_hidden.value.row(0);
  GruGates g;
  g.r = sigmoid(gi.leftCols(hd) + gh.leftCols(hd));
  g.z = sigmoid(gi.middleCols(hd, hd) + gh.middleCols(hd, hd));
  g.hn = gh.rightCols(hd);
  g.n = (gi.rightCols(hd).array() + g.r.array() * g.hn.array()).tanh().matrix();
  g.h_next = ((1.0 - g.z.array()) * g.n.array() + g.z.array() * h.array()).matrix();
  return g;
}

Mat as_row(const Vec& v) { return v.transpose(); }

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
  }
  return "identity";
}

Activation activation_from_string(std::string_view s) {
  if (s == "identity") return Activation::kIdentity;
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  throw ContractError("unknown activation '" + std::string(s) + "'");
}

Dense make_dense(const std::string& name, Eigen::Index in, Eigen::Index out, Activation act,
                 Rng& rng) {
  require(in > 0 && out > 0, "make_dense: dimensions must be positive");
  Dense d;
  d.weight = {name + ".weight", glorot_uniform(out, in, rng)};
  d.bias = {name + ".bias", Mat::Zero(1, out)};
  d.activation = act;
  return d;
}

Mat dense_forward(const Dense& layer, const Mat& input) {
  require(input.cols() == layer.in_dim(),
          "dense_forward: input has " + std::to_string(input.cols()) + " features, layer expects " +
              std::to_string(layer.in_dim()));
  Mat pre = input * layer.weight.value.transpose();
  pre.rowwise() += layer.bias.value.row(0);
  return activate(layer.activation, std::move(pre));
}

Vec dense_forward(const Dense& layer, const Vec& input) {
  return dense_forward(layer, as_row(input)).row(0).transpose();
}

Mlp make_mlp(const std::string& name, Eigen::Index in, const std::vector<int>& hidden,
             Eigen::Index out, Activation hidden_act, Rng& rng) {
  Mlp net;
  Eigen::Index prev = in;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    net.layers.push_back(
        make_dense(name + ".l" + std::to_string(i), prev, hidden[i], hidden_act, rng));
    prev = hidden[i];
  }
  net.layers.push_back(make_dense(name + ".out", prev, out, Activation::kIdentity, rng));
  return net;
}

Mat mlp_forward(const Mlp& net, const Mat& input) {
  Mat x = dense_forward(net.layers.front(), input);
  for (std::size_t i = 1; i < net.layers.size(); ++i) x = dense_forward(net.layers[i], x);
  return x;
}

GaussianHead make_gaussian_head(const std::string& name, Eigen::Index in,
                                const std::vector<int>& hidden, Eigen::Index dim,
                                Activation hidden_act, Rng& rng) {
  return GaussianHead{make_mlp(name, in, hidden, 2 * dim, hidden_act, rng)};
}

GaussianParams GaussianBatch::row(Eigen::Index r) const {
  return GaussianParams{mean.row(r).transpose(), log_var.row(r).transpose()};
}

GaussianBatch gaussian_head_forward(const GaussianHead& head, const Mat& input) {
  const Mat out = mlp_forward(head.net, input);
  const Eigen::Index d = head.dim();
  return GaussianBatch{out.leftCols(d), out.rightCols(d).cwiseMax(kLogVarMin).cwiseMin(kLogVarMax)};
}

GaussianParams gaussian_head_forward(const GaussianHead& head, const Vec& input) {
  return gaussian_head_forward(head, as_row(input)).row(0);
}

Gru make_gru(const std::string& name, Eigen::Index input_dim, Eigen::Index state_dim, Rng& rng) {
  require(input_dim > 0 && state_dim > 0, "make_gru: dimensions must be positive");
  Gru g;
  g.w_input = {name + ".w_input", glorot_uniform(3 * state_dim, input_dim, rng)};
  g.w_hidden = {name + ".w_hidden", glorot_uniform(3 * state_dim, state_dim, rng)};
  g.b_input = {name + ".b_input", Mat::Zero(1, 3 * state_dim)};
  g.b_hidden = {name + ".b_hidden", Mat::Zero(1, 3 * state_dim)};
  return g;
}

Mat gru_step(const Gru& cell, const Mat& h, const Mat& x) { return gru_gates(cell, h, x).h_next; }

Vec gru_step(const Gru& cell, const Vec& h, const Vec& x) {
  return gru_step(cell, as_row(h), as_row(x)).row(0).transpose();
}

void collect_params(Dense& layer, std::vector<ParamTensor*>& out) {
  out.push_back(&layer.weight);
  out.push_back(&layer.bias);
}

void collect_params(Mlp& net, std::vector<ParamTensor*>& out) {
  for (Dense& l : net.layers) collect_params(l, out);
}

void collect_params(GaussianHead& head, std::vector<ParamTensor*>& out) {
  collect_params(head.net, out);
}

void collect_params(Gru& cell, std::vector<ParamTensor*>& out) {
  out.push_back(&cell.w_input);
  out.push_back(&cell.w_hidden);
  out.push_back(&cell.b_input);
  out.push_back(&cell.b_hidden);
}

namespace ad {

Var dense(const Dense& layer, Var input) {
  Tape& tape = input.tape();
  const Var w = tape.param(layer.weight);
  const Var b = tape.param(layer.bias);
  const Activation act = layer.activation;
  return tape.record("dense", dense_forward(layer, input.value()), {input, w, b},
                     [input, w, b, act](Tape& t, const Mat& g, const Mat& y) {
                       Mat gpre;
                       switch (act) {
                         case Activation::kIdentity:
                           gpre = g;
                           break;
                         case Activation::kTanh:
                           gpre = (g.array() * (1.0 - y.array().square())).matrix();
                           break;
                         case Activation::kRelu:
                           gpre = (y.array() > 0.0).select(g, 0.0).matrix();
                           break;
                       }
                       if (t.requires_grad(w)) t.accumulate(w, gpre.transpose() * input.value());
                       if (t.requires_grad(b)) t.accumulate(b, gpre.colwise().sum());
                       if (t.requires_grad(input)) t.accumulate(input, gpre * w.value());
                     });
}

Var mlp(const Mlp& net, Var input) {
  Var x = dense(net.layers.front(), input);
  for (std::size_t i = 1; i < net.layers.size(); ++i) x = dense(net.layers[i], x);
  return x;
}

GaussianVar gaussian_head(const GaussianHead& head, Var input) {
  const Var out = mlp(head.net, input);
  const Eigen::Index d = head.dim();
  return GaussianVar{slice_cols(out, 0, d), clamp(slice_cols(out, d, d), kLogVarMin, kLogVarMax)};
}

Var gru_step(const Gru& cell, Var h, Var x) {
  Tape& tape = h.tape();
  const Var wi = tape.param(cell.w_input);
  const Var wh = tape.param(cell.w_hidden);
  const Var bi = tape.param(cell.b_input);
  const Var bh = tape.param(cell.b_hidden);
  GruGates gates = gru_gates(cell, h.value(), x.value());
  Mat h_next = gates.h_next;
  const Eigen::Index hd = cell.state_dim();
  return tape.record(
      "gru_step", std::move(h_next), {h, x, wi, wh, bi, bh},
      [h, x, wi, wh, bi, bh, hd, gates = std::move(gates)](Tape& t, const Mat& g, const Mat&) {
        const auto r = gates.r.array();
        const auto z = gates.z.array();
        const auto n = gates.n.array();
        const Eigen::ArrayXXd a_n = g.array() * (1.0 - z) * (1.0 - n.square());
        const Eigen::ArrayXXd a_z = g.array() * (h.value().array() - n) * z * (1.0 - z);
        const Eigen::ArrayXXd a_r = a_n * gates.hn.array() * r * (1.0 - r);
        Mat d_gi(g.rows(), 3 * hd);
        d_gi << a_r.matrix(), a_z.matrix(), a_n.matrix();
        Mat d_gh(g.rows(), 3 * hd);
        d_gh << a_r.matrix(), a_z.matrix(), (a_n * r).matrix();
        if (t.requires_grad(wi)) t.accumulate(wi, d_gi.transpose() * x.value());
        if (t.requires_grad(bi)) t.accumulate(bi, d_gi.colwise().sum());
        if (t.requires_grad(wh)) t.accumulate(wh, d_gh.transpose() * h.value());
        if (t.requires_grad(bh)) t.accumulate(bh, d_gh.colwise().sum());
        if (t.requires_grad(x)) t.accumulate(x, d_gi * wi.value());
        if (t.requires_grad(h))
          t.accumulate(h, (d_gh * wh.value()) + (g.array() * z).matrix());
      });
}

}  // namespace ad
}  // namespace hme
