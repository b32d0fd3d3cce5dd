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

#include "hme/nn/autodiff.hpp"

// Registered differentiable primitives. Every function here records exactly one
// node (or a short fixed composition of them) on the tape of its first argument.
namespace hme::ad {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);

// a + row, with `row` (1 x n) broadcast over every row of `a`.
Var add_row(Var a, Var row);

// a * b^T. Weights are stored [out, in], so this is the dense-layer product.
Var matmul_nt(Var a, Var b);

Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);
Var exp(Var a);
Var square(Var a);

// log(exp(a) + exp(b)), elementwise and overflow-safe.
Var logaddexp(Var a, Var b);

// Gradient passes only where lo < a < hi.
Var clamp(Var a, double lo, double hi);

Var sum(Var a);
Var mean(Var a);
// Per-row sum, rows x 1.
Var row_sum(Var a);

Var concat_cols(Var a, Var b);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);

// Stacks `times` copies of `a` vertically.
Var tile_rows(Var a, int times);

// Mean of `a` (times*n x 1) over the `times` stacked blocks, giving n x 1.
Var block_mean(Var a, int times);

}  // namespace hme::ad
