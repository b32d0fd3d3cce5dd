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

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "hme/app/pipeline.hpp"
#include "hme/app/server.hpp"
#include "hme/errors.hpp"
#include "hme/io/files.hpp"

namespace {

enum ExitCode { kOk = 0, kBadConfig = 1, kMissingStage = 2, kHashMismatch = 3, kFailure = 4 };

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("hme");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  const char* env = std::getenv("APP_LOG");
  if (env == nullptr || *env == '\0') {
    spdlog::set_level(spdlog::level::info);
    return;
  }
  const auto level = spdlog::level::from_str(env);
  // from_str maps unknown names to off; only accept that for "off" itself.
  if (level == spdlog::level::off && std::string(env) != "off") {
    spdlog::set_level(spdlog::level::info);
    spdlog::warn("APP_LOG='{}' is not a level (trace, debug, info, warn, error, critical, off)", env);
    return;
  }
  spdlog::set_level(level);
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool force = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "pipeline config (TOML)")->required();
  sub->add_option("--seed", c.seed, "override the global seed");
  sub->add_option("--out", c.out, "output location override");
  sub->add_flag("--force", c.force, "accept artifacts from a different config");
}

hme::PipelineConfig load(const Common& c) {
  hme::PipelineConfig cfg = hme::load_pipeline_config(c.config);
  if (c.seed) hme::apply_seed(cfg, *c.seed);
  return cfg;
}

int serve(const hme::PipelineConfig& cfg, bool force) {
  const hme::LoadedModels models = hme::load_all_models(cfg, !force);
  hme::LiveServer server(models, cfg.serve);
  server.start();
  boost::asio::io_context ioc;
  boost::asio::signal_set signals(ioc, SIGINT, SIGTERM);
  signals.async_wait([](const boost::system::error_code&, int sig) { spdlog::info("signal {}, stopping", sig); });
  ioc.run();
  server.stop();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Interaction motion embeddings: synthetic data, training, evaluation and live serving"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hme::kVersion);

  Common c;
  std::string agent;
  hme::RolloutRequest rollout;
  std::optional<int> port;

  auto* synth = app.add_subcommand("synth", "generate the synthetic HHI and HRI dataset (--out: dataset path)");
  add_common(synth, c);
  auto* emb = app.add_subcommand("train-embedding", "Step 1 (human) or Step 3 (robot): windowed VAE (--out: checkpoint dir)");
  add_common(emb, c);
  emb->add_option("--agent", agent, "human or robot")->required()->check(CLI::IsMember({"human", "robot"}));
  auto* dyn = app.add_subcommand("train-dynamics", "Step 2: shared task dynamics (--out: checkpoint dir)");
  add_common(dyn, c);
  auto* robot = app.add_subcommand("train-robot", "Step 4: robot mapping from task dynamics (--out: checkpoint dir)");
  add_common(robot, c);
  auto* base = app.add_subcommand("train-baselines", "Gaussian, raw HR and raw R baselines (--out: checkpoint dir)");
  add_common(base, c);
  auto* eval = app.add_subcommand("eval", "benchmark report (--out: report dir)");
  add_common(eval, c);
  auto* roll = app.add_subcommand("rollout", "predict one HRI test trial (--out: JSON file, default stdout)");
  add_common(roll, c);
  roll->add_option("--trial", rollout.trial_id, "trial id (default: first HRI test trial)");
  roll->add_option("--prefix", rollout.prefix, "observed frames")->check(CLI::PositiveNumber);
  roll->add_option("--horizon", rollout.horizon, "predicted frames")->check(CLI::PositiveNumber);
  auto* srv = app.add_subcommand("serve", "live predictor over websocket plus static UI (--out unused)");
  add_common(srv, c);
  srv->add_option("--port", port, "override serve.port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadConfig;
  }

  try {
    hme::PipelineConfig cfg = load(c);
    if (!c.out.empty()) {
      if (synth->parsed()) cfg.paths.dataset = c.out;
      if (emb->parsed() || dyn->parsed() || robot->parsed() || base->parsed()) cfg.paths.checkpoints = c.out;
      if (eval->parsed()) cfg.paths.reports = c.out;
    }
    if (port) cfg.serve.port = *port;

    if (synth->parsed()) hme::run_synth(cfg);
    if (emb->parsed()) hme::run_train_embedding(cfg, agent == "human" ? hme::AgentKind::kHuman : hme::AgentKind::kRobot);
    if (dyn->parsed()) hme::run_train_dynamics(cfg);
    if (robot->parsed()) hme::run_train_robot(cfg);
    if (base->parsed()) hme::run_train_baselines(cfg);
    if (eval->parsed()) hme::run_eval(cfg, c.force);
    if (roll->parsed()) {
      const std::string text = hme::run_rollout(cfg, rollout, c.force).dump(2) + "\n";
      if (c.out.empty()) {
        std::cout << text;
      } else {
        hme::write_file_atomic(c.out, text);
      }
    }
    if (srv->parsed()) return serve(cfg, c.force);
    return kOk;
  } catch (const hme::ConfigError& e) {
    spdlog::error("invalid config: {}", e.what());
    return kBadConfig;
  } catch (const hme::MissingStageError& e) {
    spdlog::error("{}", e.what());
    return kMissingStage;
  } catch (const hme::HashMismatchError& e) {
    spdlog::error("{}", e.what());
    return kHashMismatch;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
}
