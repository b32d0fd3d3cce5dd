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


#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "doctest.h"
#include "hme/app/config.hpp"
#include "hme/app/pipeline.hpp"
#include "hme/app/protocol.hpp"
#include "hme/app/server.hpp"
#include "hme/data/embodiment.hpp"
#include "hme/data/synth.hpp"
#include "hme/errors.hpp"
#include "hme/io/files.hpp"
#include "support/schema_check.hpp"
#include "support/tiny_world.hpp"

using namespace hme;
namespace fs = std::filesystem;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = boost::asio::ip::tcp;
using json = nlohmann::json;

namespace {

const fs::path kSource = HME_SOURCE_DIR;
const fs::path kCli = HME_CLI;

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> n{0};
    path = fs::temp_directory_path() / ("hme_app_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

// A full pipeline config small enough to run stages in seconds.
std::string small_toml(const fs::path& dir, std::uint64_t seed = 0) {
  std::string s = "seed = " + std::to_string(seed) + "\n";
  s += "[paths]\n";
  s += "dataset = \"" + (dir / "data.jsonl").string() + "\"\n";
  s += "checkpoints = \"" + (dir / "ckpt").string() + "\"\n";
  s += "reports = \"" + (dir / "reports").string() + "\"\n";
  for (const char* pair : {"hhi", "hri"})
    for (Action a : kAllActions)
      s += std::string("[synth.") + pair + ".actions." + std::string(to_string(a)) + "]\ntrials = " +
           (a == Action::kHandShake ? "5" : "0") + "\n";
  s += "[embedding.human]\nepochs = 1\nhidden = [16]\nlatent_dim = 4\n";
  s += "[embedding.robot]\nepochs = 1\nhidden = [16]\nlatent_dim = 4\n";
  return s;
}

fs::path write_config(const TempDir& d, const std::string& text, const std::string& name = "c.toml") {
  const fs::path p = d.path / name;
  std::ofstream(p) << text;
  return p;
}

struct CliResult {
  int code = -1;
  std::string output;
};

CliResult run_cli(const TempDir& d, const std::string& args) {
  const fs::path log = d.path / "cli.log";
  const std::string cmd = kCli.string() + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = read_text_file(log);
  return r;
}

const json& schema() {
  static const json s = json::parse(read_text_file(kSource / "web" / "protocol.schema.json"));
  return s;
}

bool server_ok(const json& m) { return hme::testing::schema_accepts(schema(), schema()["$defs"]["server_message"], m); }
bool client_ok(const json& m) { return hme::testing::schema_accepts(schema(), schema()["$defs"]["client_message"], m); }

const LoadedModels& live_models() {
  static const LoadedModels models = [] {
    const auto& w = hme::testing::tiny_world();
    LoadedModels m;
    m.human = w.human;
    m.dynamics = w.dynamics;
    m.robot = w.robot;
    RobotMappingConfig rc;
    rc.epochs = 3;
    rc.batch_trials = 2;
    rc.learning_rate = 3e-3;
    m.hme = train_robot_mapping(w.hri.train, {&m.robot, &m.human, &m.dynamics}, rc).model;
    return m;
  }();
  return models;
}

json frame_msg(std::int64_t t, double x, double y) {
  return {{"type", "frame"}, {"t_ms", t}, {"hand_xy", {x, y}}};
}

std::pair<double, double> hand_at(int i) {
  return {0.5 + 0.3 * std::sin(0.15 * i), 0.5 + 0.35 * std::sin(0.31 * i + 0.4)};
}

}  // namespace

TEST_CASE("config: defaults, the shipped tiny config and round trip") {
  const PipelineConfig d = default_pipeline_config();
  CHECK(d.human_embedding.window == 40);
  CHECK_NOTHROW(pipeline_config_from_json(to_json(d)));
  const PipelineConfig tiny = load_pipeline_config(kSource / "configs" / "tiny.toml");
  CHECK(tiny.dynamics.state_dim == 128);
  CHECK(tiny.serve.action == Action::kHandShake);
  const PipelineConfig back = pipeline_config_from_json(to_json(tiny));
  CHECK(pipeline_config_hash(back) == pipeline_config_hash(tiny));
  CHECK(to_json(back) == to_json(tiny));
  CHECK(pipeline_config_hash(tiny).size() == 16);
}

TEST_CASE("config: errors carry the field path") {
  const auto path_of = [](const std::string& toml) {
    try {
      parse_pipeline_config(toml);
    } catch (const ConfigError& e) {
      return e.path();
    }
    return std::string("<accepted>");
  };
  CHECK(path_of("[dynamics]\nepochs = 0\n") == "dynamics.epochs");
  CHECK(path_of("[dynamics]\nbogus = 1\n") == "dynamics.bogus");
  CHECK(path_of("[dynamics]\nstate_dim = \"big\"\n") == "dynamics.state_dim");
  CHECK(path_of("[embedding.human]\nwindow = 20\n") == "embedding.human.window");
  CHECK(path_of("test_fraction = 1.5\n") == "test_fraction");
  CHECK(path_of("[serve]\nport = 70000\n") == "serve.port");
  CHECK(path_of("[serve]\naction = \"dance\"\n").rfind("serve.action", 0) == 0);
  CHECK(path_of("[eval]\nstride = 41\n") == "eval.stride");
  CHECK(path_of("seed = [\n") == "<toml>");
  CHECK(path_of("[dynamics]\nepochs = 3\n") == "<accepted>");
  CHECK_THROWS_AS(load_pipeline_config("/nonexistent/c.toml"), ConfigError);
}

TEST_CASE("config hash ignores paths and serve options, tracks everything else") {
  PipelineConfig a = default_pipeline_config();
  const std::string h = pipeline_config_hash(a);
  PipelineConfig b = a;
  b.paths.dataset = "/elsewhere/d.jsonl";
  b.serve.port = 9999;
  b.serve.static_dir = "/srv";
  CHECK(pipeline_config_hash(b) == h);
  b.dynamics.epochs += 1;
  CHECK(pipeline_config_hash(b) != h);
  PipelineConfig c = a;
  apply_seed(c, 7);
  CHECK(pipeline_config_hash(c) != h);
  CHECK(c.dynamics.seed == derive_seed(7, "dynamics"));
  CHECK(c.dynamics.seed != c.robot.seed);
  CHECK(derive_seed(7, "dynamics") == derive_seed(7, "dynamics"));
  CHECK(derive_seed(7, "dynamics") != derive_seed(8, "dynamics"));
}

TEST_CASE("pipeline: stage order and hash checks") {
  TempDir d;
  const PipelineConfig cfg = parse_pipeline_config(small_toml(d.path));
  const auto step_of = [](auto&& f) {
    try {
      f();
    } catch (const MissingStageError& e) {
      return e.step();
    }
    return -1;
  };
  CHECK(step_of([&] { run_train_dynamics(cfg); }) == 1);
  CHECK(step_of([&] { load_splits(cfg, true); }) == 0);
  run_synth(cfg);
  const ArtifactPaths a = artifact_paths(cfg);
  CHECK(fs::exists(a.dataset));
  CHECK(fs::exists(a.dataset_meta));
  CHECK(step_of([&] { run_train_embedding(cfg, AgentKind::kRobot); }) == 2);
  CHECK(step_of([&] { run_train_robot(cfg); }) == 1);
  const DatasetSplits s = load_splits(cfg, true);
  CHECK(s.hhi.train.size() + s.hhi.test.size() == 5);
  CHECK(s.hri.train.size() + s.hri.test.size() == 5);

  PipelineConfig other = cfg;
  apply_seed(other, 3);
  CHECK_THROWS_AS(load_splits(other, true), HashMismatchError);
  CHECK_NOTHROW(load_splits(other, false));

  run_train_embedding(cfg, AgentKind::kHuman);
  CHECK(fs::exists(a.human_embedding));
  CHECK(step_of([&] { run_train_robot(cfg); }) == 2);
  CHECK(step_of([&] { load_all_models(cfg, true); }) == 2);
  CHECK_THROWS_AS(load_all_models(other, true), HashMismatchError);
}

TEST_CASE("cli: exit codes and messages") {
  TempDir d;
  const fs::path cfg = write_config(d, small_toml(d.path));
  CHECK(run_cli(d, "--version").code == 0);
  CHECK(run_cli(d, "").code == 1);
  CHECK(run_cli(d, "frobnicate").code == 1);
  CHECK(run_cli(d, "synth").code == 1);

  const CliResult bad = run_cli(d, "synth --config " + write_config(d, "[dynamics]\nepochs = 0\n", "bad.toml").string());
  CHECK(bad.code == 1);
  CHECK(bad.output.find("dynamics.epochs") != std::string::npos);
  CHECK(run_cli(d, "synth --config " + (d.path / "missing.toml").string()).code == 1);

  const CliResult early = run_cli(d, "train-dynamics --config " + cfg.string());
  CHECK(early.code == 2);
  CHECK(early.output.find("Step 1") != std::string::npos);

  CHECK(run_cli(d, "synth --config " + cfg.string()).code == 0);
  CHECK(run_cli(d, "train-embedding --agent human --config " + (d.path / "x.toml").string()).code == 1);
  const CliResult nodata = run_cli(d, "eval --force --config " + write_config(d, small_toml(d.path / "empty"), "e.toml").string());
  CHECK(nodata.code == 2);
  CHECK(run_cli(d, "train-embedding --agent robot --config " + cfg.string()).output.find("Step 2") != std::string::npos);

  const CliResult emb = run_cli(d, "train-embedding --agent human --config " + cfg.string());
  CHECK(emb.code == 0);
  CHECK(emb.output.find("config") != std::string::npos);
  CHECK(run_cli(d, "eval --config " + cfg.string()).code == 2);
  CHECK(run_cli(d, "eval --seed 4 --config " + cfg.string()).code == 3);
  CHECK(run_cli(d, "eval --seed 4 --force --config " + cfg.string()).code == 2);

  // --out for synth is the dataset path.
  const fs::path alt = d.path / "alt" / "data.jsonl";
  CHECK(run_cli(d, "synth --config " + cfg.string() + " --out " + alt.string()).code == 0);
  CHECK(fs::exists(alt));
  CHECK(read_text_file(alt) == read_text_file(d.path / "data.jsonl"));
}

TEST_CASE("protocol: client message parsing") {
  const auto hello = std::get<HelloMessage>(parse_client_message(R"({"type":"hello","protocol":1,"action":"rocket"})"));
  CHECK(hello.protocol == 1);
  CHECK(hello.action == Action::kRocket);
  const auto f = std::get<FrameMessage>(parse_client_message(R"({"type":"frame","t_ms":125,"hand_xy":[0.25,0.75]})"));
  CHECK(f.t_ms == 125);
  CHECK(f.x == 0.25);
  CHECK(f.y == 0.75);
  CHECK(std::holds_alternative<ByeMessage>(parse_client_message(R"({"type":"bye"})")));
  for (const char* bad : {"", "[]", "{}", "not json", R"({"type":"dance"})", R"({"type":7})",
                          R"({"type":"hello","protocol":1})", R"({"type":"hello","protocol":"1","action":"rocket"})",
                          R"({"type":"hello","protocol":1,"action":"tango"})",
                          R"({"type":"frame","t_ms":1.5,"hand_xy":[0,0]})", R"({"type":"frame","t_ms":1,"hand_xy":[0]})",
                          R"({"type":"frame","t_ms":1,"hand_xy":[0,"a"]})", R"({"type":"frame","t_ms":1,"hand_xy":[0,1e999]})",
                          R"({"type":"frame","t_ms":1,"hand_xy":[0,0],"extra":1})", R"({"type":"bye","why":"x"})"})
    CHECK_THROWS_AS(parse_client_message(bad), ProtocolError);

  const json ack = hello_ack_message(Action::kHandWave, 40, 7);
  CHECK(ack == json{{"type", "hello_ack"}, {"protocol", 1}, {"action", "hand_wave"}, {"w", 40}, {"robot_dims", 7}});
  CHECK(server_ok(ack));
  CHECK(server_ok(error_message("x")));
  CHECK(client_ok(json::parse(R"({"type":"hello","protocol":1,"action":"hand_shake"})")));
  CHECK(client_ok(frame_msg(3, 0.1, 0.9)));
  CHECK_FALSE(client_ok(frame_msg(3, 0.1, 1.9)));
}

TEST_CASE("frame clock: 40 Hz grid, interpolation, holds and limits") {
  FrameClock c;
  auto t = c.push(1000, 0.0, 0.0);
  REQUIRE(t.size() == 1);
  CHECK(t[0].t_ms == 1000);
  CHECK(c.push(1010, 0.1, 0.1).empty());
  t = c.push(1030, 0.3, 0.3);
  REQUIRE(t.size() == 1);
  CHECK(t[0].t_ms == 1025);
  CHECK(t[0].x == doctest::Approx(0.1 + 0.2 * 15.0 / 20.0));
  CHECK_FALSE(t[0].stale);
  CHECK_THROWS_AS(c.push(1030, 0.0, 0.0), ProtocolError);
  CHECK_THROWS_AS(c.push(900, 0.0, 0.0), ProtocolError);

  // A 95 ms gap: held ticks are stale, the tick at the new sample is fresh.
  t = c.push(1125, 0.9, 0.9);
  REQUIRE(t.size() == 4);
  for (int i = 0; i < 3; ++i) {
    CHECK(t[static_cast<std::size_t>(i)].stale);
    CHECK(t[static_cast<std::size_t>(i)].x == 0.3);
  }
  CHECK(t[3].t_ms == 1125);
  CHECK(t[3].x == 0.9);
  CHECK_FALSE(t[3].stale);

  CHECK(c.push(60000, 0.5, 0.5).size() == FrameClock::kMaxCatchUp);

  // 120 Hz input for 10 s.
  FrameClock fast;
  std::size_t ticks = 0;
  for (int i = 0; i <= 1200; ++i) ticks += fast.push((1000 * i) / 120, 0.5, 0.5).size();
  CHECK(ticks >= 400);
  CHECK(ticks <= 402);
}

TEST_CASE("live session: handshake, errors, and agreement with the offline rollout") {
  const LoadedModels& m = live_models();
  LiveSession s(m, 4);
  auto r = s.handle(frame_msg(0, 0.5, 0.5).dump());
  REQUIRE(r.message);
  CHECK((*r.message)["type"] == "error");
  CHECK_FALSE(r.close);
  r = s.handle("garbage");
  CHECK((*r.message)["type"] == "error");
  r = s.handle(R"({"type":"hello","protocol":1,"action":"hand_shake"})");
  CHECK(*r.message == hello_ack_message(Action::kHandShake, 40, 7));
  CHECK(s.greeted());
  r = s.handle(R"({"type":"hello","protocol":1,"action":"rocket"})");
  CHECK((*r.message)["type"] == "error");

  const GenerationModels gen{&m.human, &m.dynamics, &m.robot, &m.hme};
  const RowVec r0 = embodiment_map(lift_hand_xy(Action::kHandShake, 0.0, 0.5)).row(0);
  RolloutState ref = make_rollout_state(gen, r0, 4);
  Mat human(0, m.human.dims), robot(1, kRobotDims);
  robot.row(0) = r0;
  int refreshes = 0;
  for (int i = 0; i < 30; ++i) {
    const auto [x, y] = hand_at(i);
    r = s.handle(frame_msg(25 * i, x, y).dump());
    REQUIRE(r.message);
    const json& p = *r.message;
    REQUIRE(server_ok(p));
    const RowVec f = lift_hand_features(m.human, Action::kHandShake, x, y);
    const OnlineOutput o = online_step(ref, gen, f);
    human.conservativeResize(human.rows() + 1, Eigen::NoChange);
    human.row(human.rows() - 1) = f;
    for (int k = 0; k < kRobotDims; ++k) CHECK(p["robot_frame"][static_cast<std::size_t>(k)].get<double>() == o.command(k));
    CHECK(p["t_ms"] == 25 * i);
    CHECK(p["stale"] == false);
    if (o.refreshed) {
      ++refreshes;
      const Mat batch = rollout_robot(gen, human, robot, 40);
      for (Eigen::Index t = 0; t < 40; ++t)
        for (int k = 0; k < kRobotDims; ++k)
          CHECK(p["robot_window"][static_cast<std::size_t>(t)][static_cast<std::size_t>(k)].get<double>() == batch(t, k));
    }
    robot.conservativeResize(robot.rows() + 1, Eigen::NoChange);
    robot.row(robot.rows() - 1) = o.command;
  }
  CHECK(refreshes >= 7);
  CHECK(s.steps() == 30);

  // A stale gap is flagged; a bad frame leaves the session usable.
  r = s.handle(frame_msg(25 * 29 + 200, 0.4, 0.4).dump());
  CHECK((*r.message)["stale"] == true);
  r = s.handle(frame_msg(5, 0.4, 0.4).dump());
  CHECK((*r.message)["type"] == "error");
  const std::int64_t before = s.steps();
  r = s.handle(frame_msg(25 * 29 + 225, 0.4, 0.4).dump());
  CHECK((*r.message)["type"] == "prediction");
  CHECK(s.steps() == before + 1);
  r = s.handle(R"({"type":"bye"})");
  CHECK(r.close);
  CHECK(r.close_code == 1000);

  LiveSession v(m, 4);
  r = v.handle(R"({"type":"hello","protocol":2,"action":"hand_shake"})");
  CHECK(r.close);
  CHECK(r.close_code == kCloseProtocolMismatch);
  CHECK(r.close_code == 4001);
  CHECK((*r.message)["type"] == "error");
}

TEST_CASE("static asset resolution") {
  const fs::path root = "/srv/web";
  CHECK(resolve_static_path(root, "/") == root / "index.html");
  CHECK(resolve_static_path(root, "/app.js?v=2") == root / "app.js");
  CHECK(resolve_static_path(root, "/a/./b/../c.js") == root / "a" / "c.js");
  for (const char* bad : {"", "app.js", "/../etc/passwd", "/a/../../x", "/..", "/a\\..\\b"})
    CHECK(resolve_static_path(root, bad).empty());
  CHECK(content_type_for("x.html").rfind("text/html", 0) == 0);
  CHECK(content_type_for("x.js").rfind("text/javascript", 0) == 0);
  CHECK(content_type_for("x.json") == "application/json");
  CHECK(content_type_for("x.bin") == "application/octet-stream");
}

namespace {

struct Http {
  http::status status;
  std::string type;
  std::string body;
};

Http http_get(unsigned short port, const std::string& target, http::verb verb = http::verb::get) {
  boost::asio::io_context ioc;
  tcp::socket sock(ioc);
  sock.connect({boost::asio::ip::make_address("127.0.0.1"), port});
  http::request<http::string_body> req{verb, target, 11};
  req.set(http::field::host, "localhost");
  http::write(sock, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(sock, buf, res);
  return {res.result(), std::string(res[http::field::content_type]), res.body()};
}

struct WsClient {
  boost::asio::io_context ioc;
  websocket::stream<tcp::socket> ws{ioc};
  std::vector<std::pair<std::string, json>>* record = nullptr;

  explicit WsClient(unsigned short port) {
    ws.next_layer().connect({boost::asio::ip::make_address("127.0.0.1"), port});
    ws.handshake("localhost", "/live");
  }
  json ask(const std::string& text) {
    ws.write(boost::asio::buffer(text));
    beast::flat_buffer buf;
    ws.read(buf);
    json reply = json::parse(beast::buffers_to_string(buf.data()));
    if (record) {
      record->emplace_back("c2s", json::parse(text));
      record->emplace_back("s2c", reply);
    }
    return reply;
  }
};

}  // namespace

TEST_CASE("live server: static files and websocket sessions") {
  ServeOptions opts;
  opts.port = 0;
  opts.static_dir = kSource / "web";
  LiveServer server(live_models(), opts);
  const unsigned short port = server.start();
  REQUIRE(port != 0);

  SUBCASE("static assets") {
    const Http index = http_get(port, "/");
    CHECK(index.status == http::status::ok);
    CHECK(index.type.rfind("text/html", 0) == 0);
    CHECK(index.body == read_text_file(kSource / "web" / "index.html"));
    CHECK(http_get(port, "/app.js").type.rfind("text/javascript", 0) == 0);
    const Http sch = http_get(port, "/protocol.schema.json");
    CHECK(sch.type == "application/json");
    CHECK(json::parse(sch.body) == schema());
    CHECK(http_get(port, "/missing.js").status == http::status::not_found);
    CHECK(http_get(port, "/../CMakeLists.txt").status == http::status::bad_request);
    CHECK(http_get(port, "/%2e%2e/CMakeLists.txt").status == http::status::not_found);
    CHECK(http_get(port, "/", http::verb::post).status == http::status::method_not_allowed);
  }

  SUBCASE("session over the socket; the transcript is kept as a client fixture") {
    std::vector<std::pair<std::string, json>> transcript;
    WsClient c(port);
    c.record = &transcript;
    CHECK(c.ask(frame_msg(0, 0.5, 0.5).dump())["type"] == "error");
    const json ack = c.ask(R"({"type":"hello","protocol":1,"action":"hand_shake"})");
    CHECK(ack == hello_ack_message(Action::kHandShake, 40, 7));
    LiveSession local(live_models(), opts.refresh_every);
    local.handle(R"({"type":"hello","protocol":1,"action":"hand_shake"})");
    std::vector<double> rtt;
    for (int i = 0; i < 110; ++i) {
      const auto [x, y] = hand_at(i);
      const std::string msg = frame_msg(25 * i, x, y).dump();
      const auto t0 = std::chrono::steady_clock::now();
      const json p = c.ask(msg);
      rtt.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
      CHECK(server_ok(p));
      CHECK(p == *local.handle(msg).message);
    }
    c.record = nullptr;
    CHECK(c.ask("{oops")["type"] == "error");
    CHECK(c.ask(frame_msg(25 * 110, 0.5, 0.5).dump())["type"] == "prediction");
    std::sort(rtt.begin(), rtt.end());
    CHECK(rtt[rtt.size() * 95 / 100] < 25.0);
    c.ws.write(boost::asio::buffer(std::string(R"({"type":"bye"})")));
    beast::flat_buffer buf;
    beast::error_code ec;
    c.ws.read(buf, ec);
    CHECK(ec == websocket::error::closed);

    for (const auto& [dir, msg] : transcript) CHECK((dir == "c2s" ? client_ok(msg) : server_ok(msg)));
    if (const char* out = std::getenv("HME_TRANSCRIPT_OUT")) {
      std::string text;
      for (const auto& [dir, msg] : transcript) text += json{{"dir", dir}, {"msg", msg}}.dump() + "\n";
      write_file_atomic(out, text);
    }
  }

  SUBCASE("protocol mismatch closes with 4001") {
    WsClient c(port);
    const json e = c.ask(R"({"type":"hello","protocol":2,"action":"hand_shake"})");
    CHECK(e["type"] == "error");
    beast::flat_buffer buf;
    beast::error_code ec;
    c.ws.read(buf, ec);
    CHECK(ec == websocket::error::closed);
    CHECK(c.ws.reason().code == 4001);
  }

  SUBCASE("concurrent sessions are isolated") {
    std::vector<std::vector<json>> out(3);
    std::vector<std::thread> threads;
    for (int k = 0; k < 3; ++k)
      threads.emplace_back([&, k] {
        WsClient c(port);
        c.ask(R"({"type":"hello","protocol":1,"action":"hand_shake"})");
        for (int i = 0; i < 40; ++i) {
          const auto [x, y] = hand_at(i + (k == 2 ? 7 : 0));
          out[static_cast<std::size_t>(k)].push_back(c.ask(frame_msg(25 * i, x, y).dump()));
        }
      });
    for (auto& t : threads) t.join();
    CHECK(out[0] == out[1]);
    CHECK(out[0] != out[2]);
  }

  server.stop();
}
