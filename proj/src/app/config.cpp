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

#include "hme/app/config.hpp"

#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "hme/errors.hpp"
#include "hme/io/files.hpp"

namespace hme {
namespace {

using json = nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const char* type_name(const json& v) {
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  if (v.is_object()) return "table";
  return "null";
}

bool same_kind(const json& def, const json& v) {
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) return v.is_array();
  if (def.is_object()) return v.is_object();
  return false;
}

void merge_strict(json& base, const json& user, const std::string& path) {
  for (const auto& [key, value] : user.items()) {
    const std::string p = join(path, key);
    if (!base.contains(key)) throw ConfigError(p, "unknown field");
    json& slot = base[key];
    if (!same_kind(slot, value))
      throw ConfigError(p, std::string("expected ") + type_name(slot) + ", got " + type_name(value));
    if (slot.is_object()) {
      merge_strict(slot, value, p);
      continue;
    }
    if (slot.is_array() && !slot.empty()) {
      for (std::size_t i = 0; i < value.size(); ++i)
        if (!same_kind(slot.front(), value[i]))
          throw ConfigError(p + "[" + std::to_string(i) + "]",
                            std::string("expected ") + type_name(slot.front()));
    }
    slot = value.is_number_integer() && slot.is_number_float() ? json(value.get<double>()) : value;
  }
}

json strip_seed(json j) {
  j.erase("seed");
  return j;
}

void check(bool ok, const std::string& path, const std::string& msg) {
  if (!ok) throw ConfigError(path, msg);
}

void check_positive(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    const json& v = j.at(k);
    check(v.is_number() && v.get<double>() > 0.0, join(path, k), "must be positive");
  }
}

void check_hidden(const json& j, const std::string& path) {
  for (std::size_t i = 0; i < j.size(); ++i)
    check(j[i].get<int>() >= 1, path + "[" + std::to_string(i) + "]", "layer sizes must be positive");
}

template <class F>
auto decode(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ContractError& e) {
    throw ConfigError(path, e.what());
  } catch (const json::exception& e) {
    throw ConfigError(path, e.what());
  }
}

void validate_tree(const json& j) {
  check(j.at("test_fraction").get<double>() > 0.0 && j.at("test_fraction").get<double>() < 1.0,
        "test_fraction", "must lie in (0, 1)");
  for (const char* agent : {"human", "robot"}) {
    const std::string p = std::string("embedding.") + agent;
    const json& e = j.at("embedding").at(agent);
    check_positive(e, p, {"latent_dim", "window", "train_stride", "epochs", "batch_size", "learning_rate"});
    check(e.at("kl_weight").get<double>() >= 0.0, p + ".kl_weight", "must be non-negative");
    check(e.at("window").get<int>() == 40, p + ".window", "must be 40 (the benchmark protocol assumes it)");
    check_hidden(e.at("hidden"), p + ".hidden");
  }
  const json& d = j.at("dynamics");
  check_positive(d, "dynamics", {"state_dim", "d_dim", "epochs", "batch_trials", "tbptt", "learning_rate", "jsd_samples"});
  check(d.at("jsd_weight").get<double>() >= 0.0, "dynamics.jsd_weight", "must be non-negative");
  check_hidden(d.at("head_hidden"), "dynamics.head_hidden");
  const json& r = j.at("robot");
  check_positive(r, "robot", {"state_dim", "epochs", "batch_trials", "tbptt", "learning_rate"});
  check_hidden(r.at("head_hidden"), "robot.head_hidden");
  const json& ev = j.at("eval");
  check_positive(ev, "eval", {"observe", "block", "stride", "human_anchor_stride", "max_lag", "permutations"});
  check(ev.at("stride").get<int>() <= 40, "eval.stride", "must not exceed the window");
  check(ev.at("quantile").get<double>() > 0.0 && ev.at("quantile").get<double>() < 1.0, "eval.quantile",
        "must lie in (0, 1)");
  const json& s = j.at("serve");
  check(s.at("port").get<int>() >= 0 && s.at("port").get<int>() <= 65535, "serve.port", "must lie in [0, 65535]");
  check(s.at("refresh_every").get<int>() >= 1, "serve.refresh_every", "must be positive");
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t global, std::string_view stage) {
  return splitmix64(global ^ fnv1a64(stage));
}

void apply_seed(PipelineConfig& c, std::uint64_t seed) {
  c.seed = seed;
  c.hhi.seed = derive_seed(seed, "synth");
  c.hri.seed = derive_seed(seed, "synth");
  c.human_embedding.seed = derive_seed(seed, "embedding.human");
  c.robot_embedding.seed = derive_seed(seed, "embedding.robot");
  c.dynamics.seed = derive_seed(seed, "dynamics");
  c.robot.seed = derive_seed(seed, "robot");
  c.eval.seed = derive_seed(seed, "eval");
}

PipelineConfig default_pipeline_config() {
  PipelineConfig c;
  c.hhi = default_hhi_config();
  c.hri = default_hri_config();
  for (EmbeddingConfig* e : {&c.human_embedding, &c.robot_embedding}) {
    e->latent_dim = 16;
    e->hidden = {128};
    e->activation = Activation::kRelu;
    e->learning_rate = 1e-3;
    e->batch_size = 32;
  }
  c.human_embedding.epochs = 15;
  c.human_embedding.train_stride = 4;
  c.robot_embedding.epochs = 30;
  c.robot_embedding.train_stride = 2;
  c.dynamics.epochs = 20;
  c.robot.epochs = 50;
  apply_seed(c, 0);
  return c;
}

json to_json(const PipelineConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["paths"] = {{"dataset", c.paths.dataset.string()},
                {"checkpoints", c.paths.checkpoints.string()},
                {"reports", c.paths.reports.string()}};
  j["test_fraction"] = c.test_fraction;
  j["synth"] = {{"hhi", strip_seed(synth_config_to_json(c.hhi))},
                {"hri", strip_seed(synth_config_to_json(c.hri))}};
  j["embedding"] = {{"human", strip_seed(to_json(c.human_embedding))},
                    {"robot", strip_seed(to_json(c.robot_embedding))}};
  j["dynamics"] = strip_seed(to_json(c.dynamics));
  json robot = strip_seed(to_json(c.robot));
  robot.erase("input");
  robot.erase("zero_dynamics");
  j["robot"] = robot;
  const BenchmarkConfig& e = c.eval;
  j["eval"] = {{"observe", e.observe},
               {"block", e.block},
               {"stride", e.stride},
               {"human_anchor_stride", e.human_anchor_stride},
               {"max_lag", e.entrainment.max_lag},
               {"permutations", e.entrainment.permutations},
               {"quantile", e.entrainment.quantile}};
  j["serve"] = {{"host", c.serve.host},
                {"port", c.serve.port},
                {"action", to_string(c.serve.action)},
                {"refresh_every", c.serve.refresh_every},
                {"static_dir", c.serve.static_dir.string()}};
  return j;
}

PipelineConfig pipeline_config_from_json(const json& user) {
  PipelineConfig defaults = default_pipeline_config();
  json tree = to_json(defaults);
  if (!user.is_object()) throw ConfigError("<root>", "expected a table");
  merge_strict(tree, user, "");
  validate_tree(tree);

  PipelineConfig c;
  c.paths.dataset = tree["paths"]["dataset"].get<std::string>();
  c.paths.checkpoints = tree["paths"]["checkpoints"].get<std::string>();
  c.paths.reports = tree["paths"]["reports"].get<std::string>();
  c.test_fraction = tree["test_fraction"].get<double>();
  c.hhi = decode("synth.hhi", [&] {
    SynthConfig s = synth_config_from_json(tree["synth"]["hhi"]);
    validate(s);
    return s;
  });
  c.hri = decode("synth.hri", [&] {
    SynthConfig s = synth_config_from_json(tree["synth"]["hri"]);
    validate(s);
    return s;
  });
  const auto with_seed = [](json j) {
    j["seed"] = 0;
    return j;
  };
  c.human_embedding = decode("embedding.human",
                             [&] { return embedding_config_from_json(with_seed(tree["embedding"]["human"])); });
  c.robot_embedding = decode("embedding.robot",
                             [&] { return embedding_config_from_json(with_seed(tree["embedding"]["robot"])); });
  c.dynamics = decode("dynamics", [&] { return dynamics_config_from_json(with_seed(tree["dynamics"])); });
  c.robot = decode("robot", [&] {
    json r = with_seed(tree["robot"]);
    r["input"] = "robot-hri";
    r["zero_dynamics"] = false;
    return robot_mapping_config_from_json(r);
  });
  const json& e = tree["eval"];
  c.eval.observe = e["observe"].get<int>();
  c.eval.block = e["block"].get<int>();
  c.eval.stride = e["stride"].get<int>();
  c.eval.human_anchor_stride = e["human_anchor_stride"].get<int>();
  c.eval.entrainment.max_lag = e["max_lag"].get<int>();
  c.eval.entrainment.permutations = e["permutations"].get<int>();
  c.eval.entrainment.quantile = e["quantile"].get<double>();
  const json& s = tree["serve"];
  c.serve.host = s["host"].get<std::string>();
  c.serve.port = s["port"].get<int>();
  c.serve.action = decode("serve.action", [&] { return action_from_string(s["action"].get<std::string>()); });
  c.serve.refresh_every = s["refresh_every"].get<int>();
  c.serve.static_dir = s["static_dir"].get<std::string>();
  apply_seed(c, tree["seed"].get<std::uint64_t>());
  return c;
}

PipelineConfig parse_pipeline_config(std::string_view text) {
  toml::table table;
  try {
    table = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << e.description() << " at line " << e.source().begin.line;
    throw ConfigError("<toml>", msg.str());
  }
  std::ostringstream os;
  os << toml::json_formatter{table};
  return pipeline_config_from_json(json::parse(os.str()));
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("<file>", "config file " + path.string() + " not found");
  return parse_pipeline_config(read_text_file(path));
}

std::string pipeline_config_hash(const PipelineConfig& cfg) {
  json j = to_json(cfg);
  j.erase("paths");
  j.erase("serve");
  return config_hash(j);
}

}  // namespace hme
