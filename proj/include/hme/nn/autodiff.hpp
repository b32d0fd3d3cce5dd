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

#include <functional>
#include <initializer_list>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hme/nn/tensor.hpp"

namespace hme::ad {

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid while its tape lives.
class Var {
 public:
  Var() = default;

  const Mat& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape& tape() const { return *tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape over matrix-valued primitives.
//
// Nodes are appended in evaluation order, so a single reverse sweep visits every
// consumer before its inputs. Only nodes reachable from a parameter carry a
// backward closure.
class Tape {
 public:
  // Receives the node's output gradient and its forward value.
  using Backward = std::function<void(Tape&, const Mat& out_grad, const Mat& out_value)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Mat value);

  // Memoized per tensor: calling twice returns the same node.
  Var param(const ParamTensor& p);

  // Appends an op result. `inputs` decide whether the node needs a gradient;
  // `backward` is dropped when none of them does.
  Var record(std::string_view op, Mat value, std::initializer_list<Var> inputs,
             Backward backward);

  const Mat& value(const Var& v) const;
  bool requires_grad(const Var& v) const { return nodes_[v.id_].requires_grad; }

  // Adds `g` into the gradient slot of `v` (no-op for constants).
  void accumulate(const Var& v, const Mat& g);

  // Seeds d(loss)/d(loss) = 1 and sweeps backwards. `loss` must be 1x1.
  void backward(const Var& loss);

  // Gradient w.r.t. a node, zeros when it did not influence the loss.
  Mat grad(const Var& v) const;
  Mat param_grad(const ParamTensor& p) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    const Mat* external = nullptr;
    Mat grad;
    Backward backward;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const ParamTensor*, int> params_;
};

inline const Mat& Var::value() const { return tape_->value(*this); }

}  // namespace hme::ad
