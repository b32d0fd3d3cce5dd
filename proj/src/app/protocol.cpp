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

#include "hme/app/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "hme/data/embodiment.hpp"
#include "hme/data/skeleton.hpp"
#include "hme/data/synth.hpp"
#include "hme/errors.hpp"

namespace hme {
namespace {

using json = nlohmann::json;

void expect_keys(const json& j, std::initializer_list<const char*> keys) {
  for (const char* k : keys)
    if (!j.contains(k)) throw ProtocolError(std::string("missing field '") + k + "'");
  if (j.size() != keys.size()) {
    for (const auto& [k, v] : j.items())
      if (std::find_if(keys.begin(), keys.end(), [&](const char* x) { return k == x; }) == keys.end())
        throw ProtocolError("unexpected field '" + k + "'");
  }
}

json matrix_rows(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::Index subset_position(const EmbeddingModel& human, int joint_id) {
  const std::vector<int> joints = joint_subset(human.joint_subset.empty() ? "right_arm_torso" : human.joint_subset);
  const auto it = std::find(joints.begin(), joints.end(), joint_id);
  require(it != joints.end(), "live: the human model lacks the right arm joints");
  return 3 * static_cast<Eigen::Index>(it - joints.begin());
}

}  // namespace

ClientMessage parse_client_message(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    throw ProtocolError("message is not valid JSON");
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw ProtocolError("message must be an object with a string 'type'");
  const std::string type = j["type"].get<std::string>();
  if (type == "hello") {
    expect_keys(j, {"type", "protocol", "action"});
    if (!j["protocol"].is_number_integer()) throw ProtocolError("'protocol' must be an integer");
    if (!j["action"].is_string()) throw ProtocolError("'action' must be a string");
    HelloMessage h;
    h.protocol = j["protocol"].get<int>();
    try {
      h.action = action_from_string(j["action"].get<std::string>());
    } catch (const ContractError& e) {
      throw ProtocolError(e.what());
    }
    return h;
  }
  if (type == "frame") {
    expect_keys(j, {"type", "t_ms", "hand_xy"});
    if (!j["t_ms"].is_number_integer()) throw ProtocolError("'t_ms' must be an integer");
    const json& xy = j["hand_xy"];
    if (!xy.is_array() || xy.size() != 2 || !xy[0].is_number() || !xy[1].is_number())
      throw ProtocolError("'hand_xy' must be an array of two numbers");
    FrameMessage f{j["t_ms"].get<std::int64_t>(), xy[0].get<double>(), xy[1].get<double>()};
    if (!std::isfinite(f.x) || !std::isfinite(f.y)) throw ProtocolError("'hand_xy' must be finite");
    return f;
  }
  if (type == "bye") {
    expect_keys(j, {"type"});
    return ByeMessage{};
  }
  throw ProtocolError("unknown message type '" + type + "'");
}

json hello_ack_message(Action action, int window, int robot_dims) {
  return {{"type", "hello_ack"},
          {"protocol", kProtocolVersion},
          {"action", to_string(action)},
          {"w", window},
          {"robot_dims", robot_dims}};
}

json error_message(const std::string& msg) { return {{"type", "error"}, {"msg", msg}}; }

std::vector<FrameClock::Tick> FrameClock::push(std::int64_t t_ms, double x, double y) {
  std::vector<Tick> out;
  if (!started_) {
    started_ = true;
    next_ = t_ms + kFramePeriodMs;
    last_t_ = t_ms;
    last_x_ = x;
    last_y_ = y;
    out.push_back({t_ms, x, y, false});
    return out;
  }
  if (t_ms <= last_t_)
    throw ProtocolError("t_ms must increase (got " + std::to_string(t_ms) + " after " +
                        std::to_string(last_t_) + ")");
  const std::int64_t gap = t_ms - last_t_;
  const bool slow = gap > 2 * kFramePeriodMs;
  if (next_ <= t_ms) {
    const std::int64_t due = (t_ms - next_) / kFramePeriodMs + 1;
    if (due > kMaxCatchUp) next_ += (due - kMaxCatchUp) * kFramePeriodMs;
  }
  for (; next_ <= t_ms; next_ += kFramePeriodMs) {
    Tick t{next_, x, y, false};
    if (slow) {
      if (next_ < t_ms) {
        t.x = last_x_;
        t.y = last_y_;
        t.stale = true;
      }
    } else {
      const double a = static_cast<double>(next_ - last_t_) / static_cast<double>(gap);
      t.x = last_x_ + a * (x - last_x_);
      t.y = last_y_ + a * (y - last_y_);
    }
    out.push_back(t);
  }
  last_t_ = t_ms;
  last_x_ = x;
  last_y_ = y;
  return out;
}

RowVec lift_hand_features(const EmbeddingModel& human, Action action, double x, double y) {
  const Mat full = lift_hand_xy(action, std::clamp(x, 0.0, 1.0), std::clamp(y, 0.0, 1.0));
  const std::vector<int> joints = joint_subset(human.joint_subset.empty() ? "right_arm_torso" : human.joint_subset);
  return select_joints(full, joints).row(0);
}

Mat project_window_hand_xy(const EmbeddingModel& human, Action action, const Mat& window) {
  const Eigen::Index s = subset_position(human, joint::kRShoulder);
  const Eigen::Index w = subset_position(human, joint::kRWrist);
  Mat out(window.rows(), 2);
  for (Eigen::Index t = 0; t < window.rows(); ++t) {
    const Vec3 rel = (window.block(t, w, 1, 3) - window.block(t, s, 1, 3)).transpose();
    const auto xy = project_hand_xy(action, rel);
    out(t, 0) = xy[0];
    out(t, 1) = xy[1];
  }
  return out;
}

LiveSession::LiveSession(const LoadedModels& models, int refresh_every)
    : models_(models),
      gen_{&models.human, &models.dynamics, &models.robot, &models.hme},
      refresh_every_(refresh_every) {}

LiveSession::Reply LiveSession::handle(std::string_view text) {
  Reply r;
  ClientMessage msg;
  try {
    msg = parse_client_message(text);
  } catch (const ProtocolError& e) {
    r.message = error_message(e.what());
    return r;
  }
  if (const auto* h = std::get_if<HelloMessage>(&msg)) {
    if (h->protocol != kProtocolVersion) {
      r.message = error_message("unsupported protocol " + std::to_string(h->protocol) + ", server speaks " +
                                std::to_string(kProtocolVersion));
      r.close = true;
      r.close_code = kCloseProtocolMismatch;
      return r;
    }
    if (state_) {
      r.message = error_message("session already started; open a new connection to switch action");
      return r;
    }
    action_ = h->action;
    const RowVec r0 = embodiment_map(lift_hand_xy(action_, 0.0, 0.5)).row(0);
    state_ = make_rollout_state(gen_, r0, refresh_every_);
    r.message = hello_ack_message(action_, models_.robot.window(), kRobotDims);
    return r;
  }
  if (std::holds_alternative<ByeMessage>(msg)) {
    r.close = true;
    return r;
  }
  const auto& f = std::get<FrameMessage>(msg);
  if (!state_) {
    r.message = error_message("send hello before frames");
    return r;
  }
  std::vector<FrameClock::Tick> ticks;
  try {
    ticks = clock_.push(f.t_ms, f.x, f.y);
  } catch (const ProtocolError& e) {
    r.message = error_message(e.what());
    return r;
  }
  bool stale = false;
  for (const auto& t : ticks) {
    online_step(*state_, gen_, lift_hand_features(models_.human, action_, t.x, t.y));
    stale = stale || t.stale;
  }
  json p;
  p["type"] = "prediction";
  p["t_ms"] = f.t_ms;
  p["robot_frame"] = std::vector<double>(state_->last_robot.data(), state_->last_robot.data() + kRobotDims);
  p["robot_window"] = matrix_rows(state_->robot_window);
  p["human_window_hand_xy"] = matrix_rows(project_window_hand_xy(models_.human, action_, state_->human_window));
  p["stale"] = stale;
  r.message = std::move(p);
  return r;
}

}  // namespace hme
