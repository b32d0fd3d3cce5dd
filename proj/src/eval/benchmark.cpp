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

#include "hme/eval/benchmark.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hme/errors.hpp"
#include "hme/io/files.hpp"

namespace hme {

Mat benchmark_rollout(const GenerationModels& models, const InteractionTrial& trial,
                      const BenchmarkConfig& cfg) {
  const Eigen::Index T = trial.length();
  require(T > cfg.observe, "benchmark: trial " + trial.trial_id + " is shorter than the observation");
  Mat out(T - cfg.observe, kRobotDims);
  RolloutOptions opts;
  opts.stride = cfg.stride;
  for (Eigen::Index a = cfg.observe; a < T; a += cfg.block) {
    const Eigen::Index horizon = std::min<Eigen::Index>(cfg.block, T - a);
    out.middleRows(a - cfg.observe, horizon) =
        rollout_robot(models, trial.a1.frames.topRows(a), trial.a2.frames.topRows(a), horizon, opts);
  }
  return out;
}

Mat gaussian_prediction(const GaussianTrajectoryModel& m, Action action, Eigen::Index length,
                        std::uint64_t seed) {
  const Mat s = sample_gaussian_baseline(m, action, seed);
  Mat out(length, kRobotDims);
  const Eigen::Index n = std::min(length, s.rows());
  out.topRows(n) = s.topRows(n);
  for (Eigen::Index t = n; t < length; ++t) out.row(t) = s.row(s.rows() - 1);
  return out;
}

HorizonCurve human_mspe(const DynamicsModel& dynamics, const EmbeddingModel& embedding,
                        const std::vector<InteractionTrial>& trials, int anchor_stride) {
  require(anchor_stride >= 1, "human_mspe: anchor stride must be positive");
  const int w = embedding.window();
  std::vector<Mat> pred, truth;
  for (const auto& t : trials) {
    for (const AgentStream* s : {&t.a1, &t.a2}) {
      if (s->kind != AgentKind::kHuman) continue;
      for (Eigen::Index a = anchor_stride; a + w <= s->length(); a += anchor_stride) {
        pred.push_back(rollout_human(dynamics, embedding, s->frames.topRows(a), w));
        truth.push_back(s->frames.middleRows(a, w));
      }
    }
  }
  require(!pred.empty(), "human_mspe: no trial is long enough for a single anchor");
  return mspe_curve(pred, truth, "m");
}

namespace {

std::vector<Mat> block_windows(const Mat& frames_from_observe, int block) {
  std::vector<Mat> out;
  for (Eigen::Index a = 0; a + block <= frames_from_observe.rows(); a += block)
    out.push_back(frames_from_observe.middleRows(a, block));
  return out;
}

nlohmann::json method_report(const std::vector<Mat>& pred, const std::vector<Mat>& truth,
                             const Normalizer& robot_norm, int block) {
  nlohmann::json j;
  std::vector<double> per_joint;
  for (int k = 0; k < kRobotDims; ++k) per_joint.push_back(nrmsd(pred, truth, robot_norm, k));
  double avg = 0.0;
  for (double v : per_joint) avg += v;
  j["nrmsd_per_joint"] = per_joint;
  j["nrmsd_avg"] = avg / kRobotDims;
  std::vector<Mat> pw, tw;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (const Mat& m : block_windows(apply(robot_norm, pred[i]), block)) pw.push_back(m);
    for (const Mat& m : block_windows(apply(robot_norm, truth[i]), block)) tw.push_back(m);
  }
  j["mspe_curve"] = pw.empty() ? std::vector<double>(static_cast<std::size_t>(block), 0.0)
                               : mspe_curve(pw, tw, "normalized").values;
  return j;
}

}  // namespace

nlohmann::json benchmark(const BenchmarkModels& m, const std::vector<InteractionTrial>& hri_test,
                         const std::vector<InteractionTrial>& hhi_test, const BenchmarkConfig& cfg,
                         const std::string& config_hash) {
  require(m.human && m.dynamics && m.robot && m.hme && m.raw_hr && m.raw_r && m.gaussian,
          "benchmark: all four methods must be loaded");
  require(!hri_test.empty(), "benchmark: no HRI test trials");
  const std::map<std::string, GenerationModels> gens = {
      {"HME", {m.human, m.dynamics, m.robot, m.hme}},
      {"Raw HR", {m.human, nullptr, m.robot, m.raw_hr}},
      {"Raw R", {nullptr, nullptr, m.robot, m.raw_r}}};

  std::vector<Mat> truth;
  for (const auto& t : hri_test) truth.push_back(t.a2.frames.bottomRows(t.length() - cfg.observe));

  nlohmann::json report;
  report["seed"] = cfg.seed;
  report["config_hash"] = config_hash;
  report["protocol"] = {{"observe", cfg.observe}, {"block", cfg.block}, {"stride", cfg.stride}};
  for (const auto& [name, gen] : gens) {
    std::vector<Mat> pred;
    for (const auto& t : hri_test) pred.push_back(benchmark_rollout(gen, t, cfg));
    report["methods"][name] = method_report(pred, truth, m.robot->normalizer, cfg.block);
  }
  {
    std::vector<Mat> pred;
    for (const auto& t : hri_test)
      pred.push_back(gaussian_prediction(*m.gaussian, t.action, t.length(), cfg.seed)
                         .bottomRows(t.length() - cfg.observe));
    report["methods"]["Gaussian"] = method_report(pred, truth, m.robot->normalizer, cfg.block);
  }

  const RobotContext ctx{m.robot, m.human, m.dynamics};
  for (Action a : kAllActions) {
    std::vector<double> corr, thr;
    std::vector<int> lags;
    for (const auto& t : hri_test) {
      if (t.action != a) continue;
      const Mat d = extract_dynamics_means(*m.dynamics, apply(m.human->normalizer, t.a1.frames));
      const Mat z = robot_latent_means(*m.hme, ctx, t);
      EntrainmentConfig ec = cfg.entrainment;
      ec.seed = cfg.seed ^ fnv1a64(t.trial_id);
      const EntrainmentScore s = entrainment_score(d, z, ec);
      corr.push_back(s.per_factor[static_cast<std::size_t>(ec.factor)].value);
      lags.push_back(s.per_factor[static_cast<std::size_t>(ec.factor)].lag);
      thr.push_back(s.threshold);
    }
    if (corr.empty()) continue;
    const auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    std::sort(lags.begin(), lags.end());
    report["entrainment"]["per_action"][std::string(to_string(a))] = {
        {"factor2_corr", mean(corr)},
        {"lag", lags[(lags.size() - 1) / 2]},
        {"threshold", mean(thr)},
        {"trials", corr.size()}};
  }
  if (!hhi_test.empty()) report["human_mspe_curve"] = human_mspe(*m.dynamics, *m.human, hhi_test, cfg.human_anchor_stride).values;
  return report;
}

std::string benchmark_csv(const nlohmann::json& report) {
  std::ostringstream os;
  os.precision(17);
  os << "method,quantity,index,value\n";
  for (const auto& [name, r] : report.at("methods").items()) {
    const auto& pj = r.at("nrmsd_per_joint");
    for (std::size_t k = 0; k < pj.size(); ++k) os << name << ",nrmsd," << k + 1 << ',' << pj[k].get<double>() << '\n';
    os << name << ",nrmsd_avg,0," << r.at("nrmsd_avg").get<double>() << '\n';
    const auto& c = r.at("mspe_curve");
    for (std::size_t k = 0; k < c.size(); ++k) os << name << ",mspe," << k + 1 << ',' << c[k].get<double>() << '\n';
  }
  if (report.contains("human_mspe_curve")) {
    const auto& c = report.at("human_mspe_curve");
    for (std::size_t k = 0; k < c.size(); ++k) os << "human,mspe," << k + 1 << ',' << c[k].get<double>() << '\n';
  }
  if (report.contains("entrainment"))
    for (const auto& [action, e] : report.at("entrainment").at("per_action").items())
      os << action << ",factor2_corr," << e.at("lag").get<int>() << ',' << e.at("factor2_corr").get<double>() << '\n';
  return os.str();
}

void validate_report(const nlohmann::json& r) {
  const auto need = [](const nlohmann::json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) throw FormatError("report: missing field " + path + key);
    return j.at(key);
  };
  if (!need(r, "seed", "").is_number_unsigned()) throw FormatError("report: seed must be an unsigned integer");
  const auto hash = need(r, "config_hash", "");
  if (!hash.is_string() || hash.get<std::string>().size() != 16)
    throw FormatError("report: config_hash must be 16 hex digits");
  const auto methods = need(r, "methods", "");
  if (methods.size() != kBenchmarkMethods.size()) throw FormatError("report: methods must have 4 entries");
  for (const auto& name : kBenchmarkMethods) {
    const auto m = need(methods, name, "methods.");
    const std::string p = "methods." + name + ".";
    const auto pj = need(m, "nrmsd_per_joint", p);
    if (!pj.is_array() || pj.size() != kRobotDims) throw FormatError("report: " + p + "nrmsd_per_joint must have 7 values");
    for (const auto& v : pj)
      if (!v.is_number() || v.get<double>() < 0.0) throw FormatError("report: " + p + "nrmsd_per_joint has a bad value");
    if (!need(m, "nrmsd_avg", p).is_number()) throw FormatError("report: " + p + "nrmsd_avg must be a number");
    const auto c = need(m, "mspe_curve", p);
    if (!c.is_array() || c.empty()) throw FormatError("report: " + p + "mspe_curve must be a non-empty array");
  }
  const auto pa = need(need(r, "entrainment", ""), "per_action", "entrainment.");
  for (const auto& [action, e] : pa.items()) {
    const std::string p = "entrainment.per_action." + action + ".";
    if (!need(e, "factor2_corr", p).is_number()) throw FormatError("report: " + p + "factor2_corr must be a number");
    if (!need(e, "lag", p).is_number_integer()) throw FormatError("report: " + p + "lag must be an integer");
  }
}

}  // namespace hme
