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

#include "hme/nn/autodiff.hpp"

#include <string>

#include "hme/errors.hpp"

namespace hme::ad {

Var Tape::constant(Mat value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::param(const ParamTensor& p) {
  auto it = params_.find(&p);
  if (it != params_.end()) return Var(this, it->second);
  Node node;
  node.external = &p.value;
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  const int id = static_cast<int>(nodes_.size()) - 1;
  params_.emplace(&p, id);
  return Var(this, id);
}

Var Tape::record(std::string_view op, Mat value, std::initializer_list<Var> inputs,
                 Backward backward) {
  if (!value.allFinite()) {
    throw NumericError("non-finite value in forward pass of '" + std::string(op) + "'");
  }
  Node node;
  node.value = std::move(value);
  for (const Var& in : inputs) {
    if (in.tape_ != this) throw ContractError("op '" + std::string(op) + "' mixes tapes");
    node.requires_grad = node.requires_grad || nodes_[in.id_].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Mat& Tape::value(const Var& v) const {
  const Node& n = nodes_[v.id_];
  return n.external != nullptr ? *n.external : n.value;
}

void Tape::accumulate(const Var& v, const Mat& g) {
  Node& n = nodes_[v.id_];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(const Var& loss) {
  const Mat& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward() needs a scalar loss, got " + std::to_string(lv.rows()) +
                        "x" + std::to_string(lv.cols()));
  }
  for (Node& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[loss.id_].requires_grad) return;
  nodes_[loss.id_].grad = Mat::Ones(1, 1);
  for (int i = loss.id_; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.size() == 0) continue;
    n.backward(*this, n.grad, n.value);
  }
}

Mat Tape::grad(const Var& v) const {
  const Node& n = nodes_[v.id_];
  if (n.grad.size() == 0) {
    const Mat& val = value(v);
    return Mat::Zero(val.rows(), val.cols());
  }
  return n.grad;
}

Mat Tape::param_grad(const ParamTensor& p) const {
  auto it = params_.find(&p);
  if (it == params_.end()) return Mat::Zero(p.value.rows(), p.value.cols());
  return grad(Var(const_cast<Tape*>(this), it->second));
}

}  // namespace hme::ad
