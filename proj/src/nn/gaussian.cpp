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

#include "hme/nn/gaussian.hpp"

#include <cmath>

#include "hme/errors.hpp"
#include "hme/nn/ops.hpp"

namespace hme {
namespace {

void check_match(const GaussianParams& a, const GaussianParams& b, const char* op) {
  require(a.dim() == b.dim(), std::string(op) + ": dimension mismatch");
}

Mat as_row(const Vec& v) { return v.transpose(); }

}  // namespace

GaussianParams make_gaussian(Vec mean, Vec log_var) {
  require(mean.size() == log_var.size(), "GaussianParams: mean/log_var length mismatch");
  GaussianParams g;
  g.mean = std::move(mean);
  g.log_var = log_var.cwiseMax(kLogVarMin).cwiseMin(kLogVarMax);
  return g;
}

GaussianParams standard_normal_params(Eigen::Index dim) {
  return GaussianParams{Vec::Zero(dim), Vec::Zero(dim)};
}

Vec kl_rows(const Mat& q_mean, const Mat& q_log_var, const Mat& p_mean, const Mat& p_log_var) {
  const auto dm = (q_mean - p_mean).array();
  const auto ratio = (q_log_var - p_log_var).array().exp();
  const auto quad = dm.square() * (-p_log_var.array()).exp();
  return (0.5 * (ratio + quad - 1.0 - (q_log_var - p_log_var).array())).matrix().rowwise().sum();
}

Vec loglik_rows(const Mat& x, const Mat& mean, const Mat& log_var) {
  const auto d = (x - mean).array();
  return (-0.5 * (kLog2Pi + log_var.array() + d.square() * (-log_var.array()).exp()))
      .matrix()
      .rowwise()
      .sum();
}

double kl_diag_gaussian(const GaussianParams& q, const GaussianParams& p) {
  check_match(q, p, "kl_diag_gaussian");
  return kl_rows(as_row(q.mean), as_row(q.log_var), as_row(p.mean), as_row(p.log_var))(0);
}

double gaussian_loglik(const Vec& x, const GaussianParams& g) {
  require(x.size() == g.dim(), "gaussian_loglik: dimension mismatch");
  return loglik_rows(as_row(x), as_row(g.mean), as_row(g.log_var))(0);
}

Vec reparameterize(const GaussianParams& g, const Vec& noise) {
  require(noise.size() == g.dim(), "reparameterize: noise length must equal mean length");
  return g.mean + ((0.5 * g.log_var.array()).exp() * noise.array()).matrix();
}

JsdNoise make_jsd_noise(Eigen::Index rows, Eigen::Index dims, int samples, Rng& rng) {
  require(samples >= 1, "jsd_mc: num_samples must be >= 1");
  JsdNoise n;
  n.samples = samples;
  n.for_p = standard_normal(rows * samples, dims, rng);
  n.for_q = standard_normal(rows * samples, dims, rng);
  return n;
}

double jsd_mc(const GaussianParams& p, const GaussianParams& q, int num_samples,
              std::uint64_t seed) {
  check_match(p, q, "jsd_mc");
  Rng rng(seed);
  const JsdNoise noise = make_jsd_noise(1, p.dim(), num_samples, rng);
  ad::Tape tape;
  ad::GaussianVar pv{tape.constant(as_row(p.mean)), tape.constant(as_row(p.log_var))};
  ad::GaussianVar qv{tape.constant(as_row(q.mean)), tape.constant(as_row(q.log_var))};
  return ad::jsd_mc(pv, qv, noise).value()(0, 0);
}

namespace ad {

Var kl_diag_gaussian(GaussianVar q, GaussianVar p) {
  require(q.mean.cols() == p.mean.cols() && q.mean.rows() == p.mean.rows() &&
              q.log_var.cols() == q.mean.cols() && p.log_var.cols() == p.mean.cols(),
          "kl_diag_gaussian: dimension mismatch");
  Mat out = kl_rows(q.mean.value(), q.log_var.value(), p.mean.value(), p.log_var.value());
  Tape& tape = q.mean.tape();
  return tape.record(
      "kl_diag_gaussian", std::move(out), {q.mean, q.log_var, p.mean, p.log_var},
      [q, p](Tape& t, const Mat& g, const Mat&) {
        const auto dm = (q.mean.value() - p.mean.value()).array();
        const auto inv_vp = (-p.log_var.value().array()).exp();
        const auto vq = q.log_var.value().array().exp();
        const Eigen::ArrayXXd gb = g.replicate(1, q.mean.cols()).array();
        if (t.requires_grad(q.mean)) t.accumulate(q.mean, (gb * dm * inv_vp).matrix());
        if (t.requires_grad(p.mean)) t.accumulate(p.mean, (-gb * dm * inv_vp).matrix());
        if (t.requires_grad(q.log_var))
          t.accumulate(q.log_var, (gb * 0.5 * (vq * inv_vp - 1.0)).matrix());
        if (t.requires_grad(p.log_var))
          t.accumulate(p.log_var, (gb * 0.5 * (1.0 - (vq + dm.square()) * inv_vp)).matrix());
      });
}

Var gaussian_loglik(Var x, GaussianVar gv) {
  require(x.rows() == gv.mean.rows() && x.cols() == gv.mean.cols() &&
              gv.log_var.cols() == gv.mean.cols(),
          "gaussian_loglik: dimension mismatch");
  Mat out = loglik_rows(x.value(), gv.mean.value(), gv.log_var.value());
  return x.tape().record(
      "gaussian_loglik", std::move(out), {x, gv.mean, gv.log_var},
      [x, gv](Tape& t, const Mat& g, const Mat&) {
        const auto d = (x.value() - gv.mean.value()).array();
        const auto inv_v = (-gv.log_var.value().array()).exp();
        const Eigen::ArrayXXd gb = g.replicate(1, x.cols()).array();
        const Eigen::ArrayXXd dx = -gb * d * inv_v;
        if (t.requires_grad(x)) t.accumulate(x, dx.matrix());
        if (t.requires_grad(gv.mean)) t.accumulate(gv.mean, (-dx).matrix());
        if (t.requires_grad(gv.log_var))
          t.accumulate(gv.log_var, (gb * 0.5 * (d.square() * inv_v - 1.0)).matrix());
      });
}

Var reparameterize(GaussianVar g, Var noise) {
  require(noise.rows() == g.mean.rows() && noise.cols() == g.mean.cols(),
          "reparameterize: noise shape must equal mean shape");
  return add(g.mean, mul(exp(scale(g.log_var, 0.5)), noise));
}

Var jsd_mc(GaussianVar p, GaussianVar q, const JsdNoise& noise) {
  require(p.mean.cols() == q.mean.cols() && p.mean.rows() == q.mean.rows(),
          "jsd_mc: dimension mismatch");
  const int s = noise.samples;
  require(noise.for_p.rows() == p.mean.rows() * s && noise.for_p.cols() == p.mean.cols(),
          "jsd_mc: noise shape mismatch");
  Tape& tape = p.mean.tape();
  const GaussianVar pt{tile_rows(p.mean, s), tile_rows(p.log_var, s)};
  const GaussianVar qt{tile_rows(q.mean, s), tile_rows(q.log_var, s)};

  // KL(a || m) ~= mean_s [log a(x_s) - log m(x_s)], x_s ~ a, m = (p + q) / 2.
  auto half_kl_to_mixture = [&](const GaussianVar& a, const GaussianVar& b, const Mat& eps) {
    const Var x = reparameterize(a, tape.constant(eps));
    const Var log_a = gaussian_loglik(x, a);
    const Var log_b = gaussian_loglik(x, b);
    const Var log_m = add_scalar(logaddexp(log_a, log_b), -std::log(2.0));
    return block_mean(sub(log_a, log_m), s);
  };
  const Var kl_p = half_kl_to_mixture(pt, qt, noise.for_p);
  const Var kl_q = half_kl_to_mixture(qt, pt, noise.for_q);
  return scale(add(kl_p, kl_q), 0.5);
}

}  // namespace ad
}  // namespace hme
