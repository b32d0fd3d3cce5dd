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

#include "hme/nn/ops.hpp"

#include <string>

#include "hme/errors.hpp"

namespace hme::ad {
namespace {

void same_shape(const Var& a, const Var& b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
              std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
              std::to_string(b.cols()));
}

}  // namespace

Var add(Var a, Var b) {
  same_shape(a, b, "add");
  return a.tape().record("add", a.value() + b.value(), {a, b}, [a, b](Tape& t, const Mat& g, const Mat& y) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  same_shape(a, b, "sub");
  return a.tape().record("sub", a.value() - b.value(), {a, b}, [a, b](Tape& t, const Mat& g, const Mat& y) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Var mul(Var a, Var b) {
  same_shape(a, b, "mul");
  return a.tape().record("mul", a.value().cwiseProduct(b.value()), {a, b},
                         [a, b](Tape& t, const Mat& g, const Mat& y) {
                           if (t.requires_grad(a)) t.accumulate(a, g.cwiseProduct(b.value()));
                           if (t.requires_grad(b)) t.accumulate(b, g.cwiseProduct(a.value()));
                         });
}

Var scale(Var a, double c) {
  return a.tape().record("scale", a.value() * c, {a},
                         [a, c](Tape& t, const Mat& g, const Mat& y) { t.accumulate(a, g * c); });
}

Var add_scalar(Var a, double c) {
  return a.tape().record("add_scalar", a.value().array() + c, {a},
                         [a](Tape& t, const Mat& g, const Mat& y) { t.accumulate(a, g); });
}

Var add_row(Var a, Var row) {
  require(row.rows() == 1 && row.cols() == a.cols(), "add_row: row must be 1 x cols");
  Mat out = a.value();
  out.rowwise() += row.value().row(0);
  return a.tape().record("add_row", std::move(out), {a, row}, [a, row](Tape& t, const Mat& g, const Mat& y) {
    t.accumulate(a, g);
    if (t.requires_grad(row)) t.accumulate(row, g.colwise().sum());
  });
}

Var matmul_nt(Var a, Var b) {
  require(a.cols() == b.cols(), "matmul_nt: inner dimension mismatch");
  Mat out = a.value() * b.value().transpose();
  return a.tape().record("matmul_nt", std::move(out), {a, b}, [a, b](Tape& t, const Mat& g, const Mat& y) {
    if (t.requires_grad(a)) t.accumulate(a, g * b.value());
    if (t.requires_grad(b)) t.accumulate(b, g.transpose() * a.value());
  });
}

Var tanh(Var a) {
  return a.tape().record("tanh", a.value().array().tanh().matrix(), {a},
                         [a](Tape& t, const Mat& g, const Mat& y) {
                           t.accumulate(a, g.cwiseProduct((1.0 - y.array().square()).matrix()));
                         });
}

Var sigmoid(Var a) {
  return a.tape().record("sigmoid", (1.0 / (1.0 + (-a.value().array()).exp())).matrix(), {a},
                         [a](Tape& t, const Mat& g, const Mat& y) {
                           t.accumulate(a, (g.array() * y.array() * (1.0 - y.array())).matrix());
                         });
}

Var relu(Var a) {
  return a.tape().record("relu", a.value().cwiseMax(0.0), {a}, [a](Tape& t, const Mat& g, const Mat& y) {
    t.accumulate(a, (a.value().array() > 0.0).select(g, 0.0).matrix());
  });
}

Var exp(Var a) {
  return a.tape().record("exp", a.value().array().exp().matrix(), {a},
                         [a](Tape& t, const Mat& g, const Mat& y) {
                           t.accumulate(a, g.cwiseProduct(y));
                         });
}

Var square(Var a) {
  return a.tape().record("square", a.value().array().square().matrix(), {a},
                         [a](Tape& t, const Mat& g, const Mat& y) {
                           t.accumulate(a, 2.0 * g.cwiseProduct(a.value()));
                         });
}

Var logaddexp(Var a, Var b) {
  same_shape(a, b, "logaddexp");
  const auto av = a.value().array();
  const auto bv = b.value().array();
  const Eigen::ArrayXXd hi = av.max(bv);
  Mat out = (hi + ((av - hi).exp() + (bv - hi).exp()).log()).matrix();
  return a.tape().record("logaddexp", std::move(out), {a, b},
                         [a, b](Tape& t, const Mat& g, const Mat& out) {
    // d/da = exp(a - out), d/db = exp(b - out)
    if (t.requires_grad(a))
      t.accumulate(a, (g.array() * (a.value().array() - out.array()).exp()).matrix());
    if (t.requires_grad(b))
      t.accumulate(b, (g.array() * (b.value().array() - out.array()).exp()).matrix());
  });
}

Var clamp(Var a, double lo, double hi) {
  return a.tape().record("clamp", a.value().cwiseMax(lo).cwiseMin(hi), {a},
                         [a, lo, hi](Tape& t, const Mat& g, const Mat& y) {
                           const auto v = a.value().array();
                           t.accumulate(a, ((v > lo) && (v < hi)).select(g, 0.0).matrix());
                         });
}

Var sum(Var a) {
  Mat out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape().record("sum", std::move(out), {a}, [a](Tape& t, const Mat& g, const Mat& y) {
    t.accumulate(a, Mat::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  require(n > 0, "mean of an empty matrix");
  Mat out(1, 1);
  out(0, 0) = a.value().sum() / n;
  return a.tape().record("mean", std::move(out), {a}, [a, n](Tape& t, const Mat& g, const Mat& y) {
    t.accumulate(a, Mat::Constant(a.rows(), a.cols(), g(0, 0) / n));
  });
}

Var row_sum(Var a) {
  return a.tape().record("row_sum", a.value().rowwise().sum(), {a}, [a](Tape& t, const Mat& g, const Mat& y) {
    t.accumulate(a, g.replicate(1, a.cols()));
  });
}

Var concat_cols(Var a, Var b) {
  require(a.rows() == b.rows(), "concat_cols: row mismatch");
  Mat out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  const Eigen::Index na = a.cols();
  const Eigen::Index nb = b.cols();
  return a.tape().record("concat_cols", std::move(out), {a, b},
                         [a, b, na, nb](Tape& t, const Mat& g, const Mat& y) {
                           if (t.requires_grad(a)) t.accumulate(a, g.leftCols(na));
                           if (t.requires_grad(b)) t.accumulate(b, g.rightCols(nb));
                         });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.cols(), "slice_cols: out of range");
  return a.tape().record("slice_cols", a.value().middleCols(start, count), {a},
                         [a, start, count](Tape& t, const Mat& g, const Mat& y) {
                           Mat full = Mat::Zero(a.rows(), a.cols());
                           full.middleCols(start, count) = g;
                           t.accumulate(a, full);
                         });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.rows(), "slice_rows: out of range");
  return a.tape().record("slice_rows", a.value().middleRows(start, count), {a},
                         [a, start, count](Tape& t, const Mat& g, const Mat& y) {
                           Mat full = Mat::Zero(a.rows(), a.cols());
                           full.middleRows(start, count) = g;
                           t.accumulate(a, full);
                         });
}

Var tile_rows(Var a, int times) {
  require(times >= 1, "tile_rows: times must be >= 1");
  const Eigen::Index n = a.rows();
  return a.tape().record("tile_rows", a.value().replicate(times, 1), {a},
                         [a, times, n](Tape& t, const Mat& g, const Mat& y) {
                           Mat acc = g.topRows(n);
                           for (int k = 1; k < times; ++k) acc += g.middleRows(k * n, n);
                           t.accumulate(a, acc);
                         });
}

Var block_mean(Var a, int times) {
  require(times >= 1 && a.rows() % times == 0, "block_mean: rows not divisible by times");
  const Eigen::Index n = a.rows() / times;
  Mat out = a.value().topRows(n);
  for (int k = 1; k < times; ++k) out += a.value().middleRows(k * n, n);
  out /= static_cast<double>(times);
  return a.tape().record("block_mean", std::move(out), {a}, [a, times](Tape& t, const Mat& g, const Mat& y) {
    t.accumulate(a, g.replicate(times, 1) / static_cast<double>(times));
  });
}

}  // namespace hme::ad
