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

#include "hme/app/pipeline.hpp"

#include <Eigen/Core>
#include <spdlog/spdlog.h>

#include "hme/data/dataset_io.hpp"
#include "hme/data/split.hpp"
#include "hme/errors.hpp"
#include "hme/io/checkpoint.hpp"
#include "hme/io/files.hpp"

namespace hme {
namespace {

using json = nlohmann::json;

const char* step_hint(int step) {
  switch (step) {
    case 0:
      return "run `synth` first";
    case 1:
      return "run Step 1 first: `train-embedding --agent human`";
    case 2:
      return "run Step 2 first: `train-dynamics`";
    case 3:
      return "run Step 3 first: `train-embedding --agent robot`";
    case 4:
      return "run Step 4 first: `train-robot`";
    default:
      return "run `train-baselines` first";
  }
}

void require_file(const std::filesystem::path& p, int step, const std::string& what) {
  if (!std::filesystem::exists(p))
    throw MissingStageError(step, "missing " + what + " (" + p.string() + "); " + step_hint(step));
}

void check_hash(const std::string& found, const std::string& expected, const std::string& what,
                bool strict) {
  if (found == expected) return;
  const std::string msg = what + " was produced by config " + found + ", current config is " + expected;
  if (strict) throw HashMismatchError(msg + " (pass --force to use it anyway)");
  spdlog::warn("{}", msg);
}

Checkpoint load_stage(const std::filesystem::path& p, int step, const std::string& what,
                      const std::string& hash, bool strict) {
  require_file(p, step, what);
  Checkpoint c = load_checkpoint(p);
  check_hash(c.config_hash, hash, what, strict);
  return c;
}

EmbeddingModel load_embedding(const PipelineConfig& cfg, AgentKind kind, bool strict) {
  const ArtifactPaths a = artifact_paths(cfg);
  const bool human = kind == AgentKind::kHuman;
  return embedding_from_checkpoint(load_stage(human ? a.human_embedding : a.robot_embedding,
                                              human ? 1 : 3,
                                              human ? "human embedding" : "robot embedding",
                                              pipeline_config_hash(cfg), strict));
}

DynamicsModel load_dynamics(const PipelineConfig& cfg, bool strict) {
  return dynamics_from_checkpoint(load_stage(artifact_paths(cfg).dynamics, 2, "task dynamics model",
                                             pipeline_config_hash(cfg), strict));
}

}  // namespace

ArtifactPaths artifact_paths(const PipelineConfig& cfg) {
  ArtifactPaths a;
  a.dataset = cfg.paths.dataset;
  a.dataset_meta = cfg.paths.dataset;
  a.dataset_meta += ".meta.json";
  const auto& c = cfg.paths.checkpoints;
  a.human_embedding = c / "embedding-human.ckpt";
  a.dynamics = c / "dynamics.ckpt";
  a.robot_embedding = c / "embedding-robot.ckpt";
  a.robot_hri = c / "robot-hri.ckpt";
  a.raw_hr = c / "raw-hr.ckpt";
  a.raw_r = c / "raw-r.ckpt";
  a.gaussian = c / "gaussian-baseline.ckpt";
  a.report_json = cfg.paths.reports / "report.json";
  a.report_csv = cfg.paths.reports / "report.csv";
  return a;
}

void log_run_header(const PipelineConfig& cfg, const std::string& stage) {
  spdlog::info("hme {} | stage {} | seed {} | config {} | eigen {}.{}.{} | spdlog {}.{}.{} | json {}.{}.{}",
               kVersion, stage, cfg.seed, pipeline_config_hash(cfg), EIGEN_WORLD_VERSION,
               EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION, SPDLOG_VER_MAJOR, SPDLOG_VER_MINOR,
               SPDLOG_VER_PATCH, NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
               NLOHMANN_JSON_VERSION_PATCH);
}

void run_synth(const PipelineConfig& cfg) {
  log_run_header(cfg, "synth");
  std::vector<InteractionTrial> trials = synth_generate_hhi(cfg.hhi);
  const std::size_t n_hhi = trials.size();
  for (auto& t : synth_generate_hri(cfg.hri)) trials.push_back(std::move(t));
  const ArtifactPaths a = artifact_paths(cfg);
  save_dataset(trials, a.dataset);
  const std::uint64_t split_seed = derive_seed(cfg.seed, "split");
  const TrialSplit hhi = split_trials(filter_by_pair(trials, PairType::kHHI), cfg.test_fraction, split_seed);
  const TrialSplit hri = split_trials(filter_by_pair(trials, PairType::kHRI), cfg.test_fraction, split_seed);
  const json meta = {{"config_hash", pipeline_config_hash(cfg)},
                     {"seed", cfg.seed},
                     {"trials", {{"HHI", n_hhi}, {"HRI", trials.size() - n_hhi}}},
                     {"split", {{"HHI", manifest_to_json(manifest_of(hhi, cfg.test_fraction, split_seed))},
                                {"HRI", manifest_to_json(manifest_of(hri, cfg.test_fraction, split_seed))}}}};
  write_file_atomic(a.dataset_meta, meta.dump(2) + "\n");
  spdlog::info("synth: wrote {} HHI and {} HRI trials to {}", n_hhi, trials.size() - n_hhi,
               a.dataset.string());
}

DatasetSplits load_splits(const PipelineConfig& cfg, bool strict) {
  const ArtifactPaths a = artifact_paths(cfg);
  require_file(a.dataset, 0, "dataset");
  require_file(a.dataset_meta, 0, "dataset metadata");
  const json meta = json::parse(read_text_file(a.dataset_meta));
  check_hash(meta.at("config_hash").get<std::string>(), pipeline_config_hash(cfg), "dataset", strict);
  const std::vector<InteractionTrial> trials = load_dataset(a.dataset);
  const std::uint64_t split_seed = derive_seed(cfg.seed, "split");
  return {split_trials(filter_by_pair(trials, PairType::kHHI), cfg.test_fraction, split_seed),
          split_trials(filter_by_pair(trials, PairType::kHRI), cfg.test_fraction, split_seed)};
}

TrainedEmbedding run_train_embedding(const PipelineConfig& cfg, AgentKind agent) {
  const bool human = agent == AgentKind::kHuman;
  log_run_header(cfg, human ? "train-embedding human" : "train-embedding robot");
  const ArtifactPaths a = artifact_paths(cfg);
  // Step 3 follows Step 2.
  if (!human) require_file(a.dynamics, 2, "task dynamics model");
  const DatasetSplits s = load_splits(cfg, false);
  const TrialSplit& split = human ? s.hhi : s.hri;
  const EmbeddingConfig& ec = human ? cfg.human_embedding : cfg.robot_embedding;
  const Normalizer norm = fit_normalizer(split.train, agent);
  const Mat windows = training_windows(split.train, agent, norm, {ec.window, ec.train_stride});
  const Eigen::Index dims = human ? split.train.front().a1.dims() : kRobotDims;
  spdlog::info("train-embedding {}: {} windows of {} x {}", to_string(agent), windows.rows(), ec.window, dims);
  TrainedEmbedding t = train_embedding(windows, ec, agent, dims, norm);
  if (human) t.model.joint_subset = cfg.hhi.joint_subset;
  for (std::size_t e = 0; e < t.elbo_trace.size(); ++e)
    spdlog::debug("epoch {} elbo {:.4f}", e + 1, t.elbo_trace[e]);
  spdlog::info("train-embedding {}: final ELBO {:.4f}, reconstruction RMSE {:.4f}", to_string(agent),
               t.elbo_trace.back(), reconstruction_rmse(t.model, windows));
  save_checkpoint(to_checkpoint(t.model, pipeline_config_hash(cfg)), human ? a.human_embedding : a.robot_embedding);
  return t;
}

TrainedDynamics run_train_dynamics(const PipelineConfig& cfg) {
  log_run_header(cfg, "train-dynamics");
  const EmbeddingModel human = load_embedding(cfg, AgentKind::kHuman, false);
  const DatasetSplits s = load_splits(cfg, false);
  TrainedDynamics t = train_dynamics(s.hhi.train, human, cfg.dynamics);
  spdlog::info("train-dynamics: loss {:.4f} -> {:.4f}", t.loss_trace.front(), t.loss_trace.back());
  save_checkpoint(to_checkpoint(t.model, pipeline_config_hash(cfg)), artifact_paths(cfg).dynamics);
  return t;
}

TrainedRobotMapping run_train_robot(const PipelineConfig& cfg) {
  log_run_header(cfg, "train-robot");
  const EmbeddingModel human = load_embedding(cfg, AgentKind::kHuman, false);
  const DynamicsModel dyn = load_dynamics(cfg, false);
  const EmbeddingModel robot = load_embedding(cfg, AgentKind::kRobot, false);
  const DatasetSplits s = load_splits(cfg, false);
  TrainedRobotMapping t = train_robot_mapping(s.hri.train, RobotContext{&robot, &human, &dyn}, cfg.robot);
  spdlog::info("train-robot: {} rows per epoch, loss {:.4f} -> {:.4f}", t.rows_per_epoch,
               t.loss_trace.front(), t.loss_trace.back());
  save_checkpoint(to_checkpoint(t.model, pipeline_config_hash(cfg)), artifact_paths(cfg).robot_hri);
  return t;
}

void run_train_baselines(const PipelineConfig& cfg) {
  log_run_header(cfg, "train-baselines");
  const EmbeddingModel human = load_embedding(cfg, AgentKind::kHuman, false);
  const EmbeddingModel robot = load_embedding(cfg, AgentKind::kRobot, false);
  const DatasetSplits s = load_splits(cfg, false);
  const ArtifactPaths a = artifact_paths(cfg);
  const std::string hash = pipeline_config_hash(cfg);
  save_checkpoint(to_checkpoint(fit_gaussian_baseline(s.hri.train), hash), a.gaussian);
  for (RawVariant v : {RawVariant::kHR, RawVariant::kR}) {
    const TrainedRobotMapping t = train_raw_variant(s.hri.train, robot, human, v, cfg.robot);
    spdlog::info("train-baselines {}: loss {:.4f} -> {:.4f}", model_kind(t.model.config.input),
                 t.loss_trace.front(), t.loss_trace.back());
    save_checkpoint(to_checkpoint(t.model, hash), v == RawVariant::kHR ? a.raw_hr : a.raw_r);
  }
}

BenchmarkModels LoadedModels::view() const {
  return {&human, &dynamics, &robot, &hme, &raw_hr, &raw_r, &gaussian};
}

LoadedModels load_all_models(const PipelineConfig& cfg, bool strict) {
  const ArtifactPaths a = artifact_paths(cfg);
  const std::string hash = pipeline_config_hash(cfg);
  LoadedModels m;
  m.human = load_embedding(cfg, AgentKind::kHuman, strict);
  m.dynamics = load_dynamics(cfg, strict);
  m.robot = load_embedding(cfg, AgentKind::kRobot, strict);
  m.hme = robot_mapping_from_checkpoint(load_stage(a.robot_hri, 4, "robot mapping", hash, strict));
  m.raw_hr = robot_mapping_from_checkpoint(load_stage(a.raw_hr, 5, "raw HR baseline", hash, strict));
  m.raw_r = robot_mapping_from_checkpoint(load_stage(a.raw_r, 5, "raw R baseline", hash, strict));
  m.gaussian = gaussian_baseline_from_checkpoint(load_stage(a.gaussian, 5, "gaussian baseline", hash, strict));
  return m;
}

json run_eval(const PipelineConfig& cfg, bool force) {
  log_run_header(cfg, "eval");
  const LoadedModels m = load_all_models(cfg, !force);
  const DatasetSplits s = load_splits(cfg, !force);
  const json report = benchmark(m.view(), s.hri.test, s.hhi.test, cfg.eval, pipeline_config_hash(cfg));
  validate_report(report);
  const ArtifactPaths a = artifact_paths(cfg);
  write_file_atomic(a.report_json, report.dump(2) + "\n");
  write_file_atomic(a.report_csv, benchmark_csv(report));
  for (const auto& name : kBenchmarkMethods)
    spdlog::info("eval: {:<8} NRMSD {:.4f}", name, report["methods"][name]["nrmsd_avg"].get<double>());
  return report;
}

json run_rollout(const PipelineConfig& cfg, const RolloutRequest& req, bool force) {
  log_run_header(cfg, "rollout");
  const LoadedModels m = load_all_models(cfg, !force);
  const DatasetSplits s = load_splits(cfg, !force);
  const InteractionTrial* trial = nullptr;
  for (const auto& t : s.hri.test)
    if (req.trial_id.empty() || t.trial_id == req.trial_id) {
      trial = &t;
      break;
    }
  if (trial == nullptr) throw ContractError("rollout: no HRI test trial '" + req.trial_id + "'");
  require(req.prefix >= 1 && req.prefix < trial->length(), "rollout: prefix must lie in [1, T)");
  require(req.horizon >= 1, "rollout: horizon must be positive");
  const GenerationModels gen{&m.human, &m.dynamics, &m.robot, &m.hme};
  const Mat robot = rollout_robot(gen, trial->a1.frames.topRows(req.prefix),
                                  trial->a2.frames.topRows(req.prefix), req.horizon);
  const Mat human = rollout_human(m.dynamics, m.human, trial->a1.frames.topRows(req.prefix), req.horizon);
  const Eigen::Index n = std::min<Eigen::Index>(req.horizon, trial->length() - req.prefix);
  return {{"trial_id", trial->trial_id},
          {"action", to_string(trial->action)},
          {"prefix", req.prefix},
          {"horizon", req.horizon},
          {"config_hash", pipeline_config_hash(cfg)},
          {"robot_frames", matrix_to_json(robot)},
          {"human_frames", matrix_to_json(human)},
          {"robot_truth", matrix_to_json(trial->a2.frames.middleRows(req.prefix, n))}};
}

}  // namespace hme
