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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hme/app/pipeline.hpp"
#include "hme/gen/generation.hpp"

namespace hme {

inline constexpr int kProtocolVersion = 1;
inline constexpr int kFramePeriodMs = 25;
// Websocket close code sent on a protocol version mismatch.
inline constexpr int kCloseProtocolMismatch = 4001;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HelloMessage {
  int protocol = kProtocolVersion;
  Action action = Action::kHandShake;
};
struct FrameMessage {
  std::int64_t t_ms = 0;
  double x = 0.0;
  double y = 0.0;
};
struct ByeMessage {};

using ClientMessage = std::variant<HelloMessage, FrameMessage, ByeMessage>;

// Strict: unknown types, missing or extra fields, and non-finite numbers are rejected.
ClientMessage parse_client_message(std::string_view text);

nlohmann::json hello_ack_message(Action action, int window, int robot_dims);
nlohmann::json error_message(const std::string& msg);

// Resamples an irregular hand stream onto a 40 Hz grid anchored at the first frame.
// Gaps longer than two periods are zero-order held and flagged stale.
class FrameClock {
 public:
  struct Tick {
    std::int64_t t_ms = 0;
    double x = 0.0;
    double y = 0.0;
    bool stale = false;
  };

  // At most this many ticks are produced per frame; older ticks of a long gap are skipped.
  static constexpr int kMaxCatchUp = 40;

  // Throws ProtocolError unless t_ms increases.
  std::vector<Tick> push(std::int64_t t_ms, double x, double y);

 private:
  bool started_ = false;
  std::int64_t next_ = 0;
  std::int64_t last_t_ = 0;
  double last_x_ = 0.0;
  double last_y_ = 0.0;
};

// Hand position in [0, 1]^2 to the model's human feature vector.
RowVec lift_hand_features(const EmbeddingModel& human, Action action, double x, double y);
// Human window (w x dims, meters) to hand positions (w x 2).
Mat project_window_hand_xy(const EmbeddingModel& human, Action action, const Mat& window);

// One websocket session: hello, then frames, then bye. Not thread-safe; one per connection.
class LiveSession {
 public:
  struct Reply {
    std::optional<nlohmann::json> message;
    bool close = false;
    int close_code = 1000;
  };

  LiveSession(const LoadedModels& models, int refresh_every);

  Reply handle(std::string_view text);
  bool greeted() const { return state_.has_value(); }
  std::int64_t steps() const { return state_ ? state_->steps : 0; }

 private:
  const LoadedModels& models_;
  GenerationModels gen_;
  int refresh_every_;
  Action action_ = Action::kHandShake;
  std::optional<RolloutState> state_;
  FrameClock clock_;
};

}  // namespace hme
