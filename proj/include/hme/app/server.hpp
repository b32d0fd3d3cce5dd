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

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "hme/app/protocol.hpp"

namespace hme {

// HTTP + websocket endpoint on one port. GET serves files under the static
// directory; an upgrade request starts a LiveSession. One thread per connection.
class LiveServer {
 public:
  LiveServer(const LoadedModels& models, ServeOptions options);
  ~LiveServer();
  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  // Binds and starts accepting; returns the bound port (useful with port 0).
  unsigned short start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Content type for a static asset, by extension.
std::string content_type_for(const std::filesystem::path& p);
// Maps a request target to a file under `root`; empty when it escapes the root or is malformed.
std::filesystem::path resolve_static_path(const std::filesystem::path& root, std::string_view target);

}  // namespace hme
