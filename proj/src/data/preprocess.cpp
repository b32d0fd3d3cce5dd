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

#include "hme/data/preprocess.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "hme/errors.hpp"

namespace hme {

AgentStream resample(const AgentStream& stream, double target_hz) {
  require(stream.rate_hz > 0.0 && target_hz > 0.0, "resample: rates must be positive");
  if (target_hz == stream.rate_hz) return stream;
  const Eigen::Index n = stream.length();
  require(n >= 2, "resample: at least two frames are needed to interpolate");
  const double duration = static_cast<double>(n - 1) / stream.rate_hz;
  const auto out_n = static_cast<Eigen::Index>(std::floor(duration * target_hz + 1e-9)) + 1;
  AgentStream out;
  out.kind = stream.kind;
  out.rate_hz = target_hz;
  out.frames.resize(out_n, stream.dims());
  for (Eigen::Index k = 0; k < out_n; ++k) {
    const double pos = static_cast<double>(k) * stream.rate_hz / target_hz;
    auto i0 = static_cast<Eigen::Index>(std::floor(pos));
    if (i0 >= n - 1) i0 = n - 2;
    const double frac = std::min(1.0, pos - static_cast<double>(i0));
    out.frames.row(k) = (1.0 - frac) * stream.frames.row(i0) + frac * stream.frames.row(i0 + 1);
  }
  return out;
}

Eigen::Index window_count(Eigen::Index length, const WindowSpec& spec) {
  require(spec.w >= 1 && spec.stride >= 1, "window spec: w and stride must be positive");
  if (length < spec.w) return 0;
  return (length - spec.w) / spec.stride + 1;
}

WindowSet extract_windows(const Mat& frames, const WindowSpec& spec) {
  require(frames.rows() >= spec.w, "extract_windows: stream shorter than window");
  const Eigen::Index count = window_count(frames.rows(), spec);
  const Eigen::Index dims = frames.cols();
  WindowSet out;
  out.starts.reserve(static_cast<std::size_t>(count));
  out.data.resize(count, spec.w * dims);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Eigen::Index t = i * spec.stride;
    out.starts.push_back(t);
    for (Eigen::Index f = 0; f < spec.w; ++f)
      out.data.block(i, f * dims, 1, dims) = frames.row(t + f);
  }
  return out;
}

Mat unflatten_window(const RowVec& flat, Eigen::Index dims) {
  require(dims > 0 && flat.size() % dims == 0, "unflatten_window: size not a multiple of dims");
  const Eigen::Index w = flat.size() / dims;
  Mat out(w, dims);
  for (Eigen::Index f = 0; f < w; ++f) out.row(f) = flat.segment(f * dims, dims);
  return out;
}

RowVec flatten_window(const Mat& frames) {
  RowVec out(frames.size());
  for (Eigen::Index f = 0; f < frames.rows(); ++f)
    out.segment(f * frames.cols(), frames.cols()) = frames.row(f);
  return out;
}

Normalizer fit_normalizer(const std::vector<Mat>& streams, AgentKind kind) {
  require(!streams.empty(), "fit_normalizer: no streams");
  const Eigen::Index dims = streams.front().cols();
  Normalizer n;
  n.kind = kind;
  n.mean = RowVec::Zero(dims);
  n.std = RowVec::Zero(dims);
  n.min = RowVec::Constant(dims, std::numeric_limits<double>::infinity());
  n.max = RowVec::Constant(dims, -std::numeric_limits<double>::infinity());
  double count = 0.0;
  for (const Mat& s : streams) {
    require(s.cols() == dims, "fit_normalizer: streams differ in dims");
    n.mean += s.colwise().sum();
    n.min = n.min.cwiseMin(s.colwise().minCoeff());
    n.max = n.max.cwiseMax(s.colwise().maxCoeff());
    count += static_cast<double>(s.rows());
  }
  n.mean /= count;
  for (const Mat& s : streams) n.std += (s.rowwise() - n.mean).cwiseAbs2().colwise().sum();
  n.std = (n.std / count).cwiseSqrt();
  for (Eigen::Index d = 0; d < dims; ++d)
    if (!(n.std(d) > 1e-12)) n.std(d) = 1.0;
  return n;
}

Normalizer fit_normalizer(const std::vector<InteractionTrial>& train, AgentKind kind) {
  std::vector<Mat> streams;
  for (const auto& t : train) {
    if (t.a1.kind == kind) streams.push_back(t.a1.frames);
    if (t.a2.kind == kind) streams.push_back(t.a2.frames);
  }
  require(!streams.empty(), "fit_normalizer: no " + std::string(to_string(kind)) + " streams");
  return fit_normalizer(streams, kind);
}

Mat apply(const Normalizer& n, const Mat& frames) {
  require(frames.cols() == n.dims(), "normalizer: dims mismatch");
  return (frames.rowwise() - n.mean).array().rowwise() / n.std.array();
}

Mat invert(const Normalizer& n, const Mat& frames) {
  require(frames.cols() == n.dims(), "normalizer: dims mismatch");
  return (frames.array().rowwise() * n.std.array()).matrix().rowwise() + n.mean;
}

RowVec apply_flat(const Normalizer& n, const RowVec& flat) {
  return flatten_window(apply(n, unflatten_window(flat, n.dims())));
}

RowVec invert_flat(const Normalizer& n, const RowVec& flat) {
  return flatten_window(invert(n, unflatten_window(flat, n.dims())));
}

namespace {

std::vector<double> to_vec(const RowVec& v) { return {v.data(), v.data() + v.size()}; }

RowVec from_vec(const nlohmann::json& j, const char* name) {
  const auto v = j.at(name).get<std::vector<double>>();
  return Eigen::Map<const RowVec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json normalizer_to_json(const Normalizer& n) {
  return {{"kind", to_string(n.kind)}, {"mean", to_vec(n.mean)}, {"std", to_vec(n.std)},
          {"min", to_vec(n.min)},      {"max", to_vec(n.max)}};
}

Normalizer normalizer_from_json(const nlohmann::json& j) {
  Normalizer n;
  try {
    n.kind = agent_kind_from_string(j.at("kind").get<std::string>());
    n.mean = from_vec(j, "mean");
    n.std = from_vec(j, "std");
    n.min = from_vec(j, "min");
    n.max = from_vec(j, "max");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("normalizer: ") + e.what());
  }
  const Eigen::Index d = n.mean.size();
  if (n.std.size() != d || n.min.size() != d || n.max.size() != d)
    throw FormatError("normalizer: field lengths disagree");
  if ((n.std.array() <= 0.0).any()) throw FormatError("normalizer: std must be positive");
  if ((n.max.array() < n.min.array()).any()) throw FormatError("normalizer: max < min");
  return n;
}

}  // namespace hme
