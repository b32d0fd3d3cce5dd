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

#include "hme/app/server.hpp"

#include <sys/socket.h>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "hme/io/files.hpp"

namespace hme {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

std::string content_type_for(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  return "application/octet-stream";
}

std::filesystem::path resolve_static_path(const std::filesystem::path& root, std::string_view target) {
  std::string path(target.substr(0, target.find_first_of("?#")));
  if (path.empty() || path.front() != '/') return {};
  if (path.back() == '/') path += "index.html";
  const std::filesystem::path rel = std::filesystem::path(path.substr(1)).lexically_normal();
  if (rel.empty() || rel.is_absolute() || *rel.begin() == "..") return {};
  for (const auto& part : rel)
    if (part == ".." || part.string().find('\\') != std::string::npos) return {};
  return root / rel;
}

struct LiveServer::Impl {
  const LoadedModels& models;
  ServeOptions options;
  asio::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::thread accept_thread;
  std::atomic<bool> stopping{false};
  std::mutex mu;
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  std::vector<Worker> sessions;
  std::vector<int> open_fds;

  Impl(const LoadedModels& m, ServeOptions o) : models(m), options(std::move(o)) {}

  void track(int fd, bool add) {
    std::lock_guard lock(mu);
    if (add) {
      open_fds.push_back(fd);
    } else {
      std::erase(open_fds, fd);
    }
  }

  http::response<http::string_body> static_response(const http::request<http::string_body>& req) {
    http::response<http::string_body> res;
    res.version(req.version());
    res.keep_alive(false);
    res.set(http::field::server, std::string("hme/") + kVersion);
    const auto fail = [&](http::status s, const std::string& body) {
      res.result(s);
      res.set(http::field::content_type, "text/plain; charset=utf-8");
      res.body() = body;
      res.prepare_payload();
      return res;
    };
    if (req.method() != http::verb::get) return fail(http::status::method_not_allowed, "GET only\n");
    const std::filesystem::path p = resolve_static_path(
        options.static_dir, std::string_view(req.target().data(), req.target().size()));
    if (p.empty()) return fail(http::status::bad_request, "bad path\n");
    if (!std::filesystem::is_regular_file(p)) return fail(http::status::not_found, "not found\n");
    res.result(http::status::ok);
    res.set(http::field::content_type, content_type_for(p));
    res.body() = read_text_file(p);
    res.prepare_payload();
    return res;
  }

  void run_websocket(tcp::socket socket, const http::request<http::string_body>& req) {
    websocket::stream<tcp::socket> ws(std::move(socket));
    ws.accept(req);
    LiveSession session(models, options.refresh_every);
    beast::flat_buffer buf;
    for (;;) {
      buf.clear();
      ws.read(buf);
      const LiveSession::Reply r = session.handle(beast::buffers_to_string(buf.data()));
      if (r.message) {
        ws.text(true);
        ws.write(asio::buffer(r.message->dump()));
      }
      if (r.close) {
        ws.close(websocket::close_reason(static_cast<websocket::close_code>(r.close_code)));
        // Drain until the peer acknowledges the close.
        beast::error_code ec;
        for (;;) {
          ws.read(buf, ec);
          if (ec) break;
        }
        return;
      }
    }
  }

  void handle(tcp::socket socket) {
    const int fd = socket.native_handle();
    track(fd, true);
    try {
      beast::flat_buffer buf;
      http::request<http::string_body> req;
      http::read(socket, buf, req);
      if (websocket::is_upgrade(req)) {
        run_websocket(std::move(socket), req);
      } else {
        http::write(socket, static_response(req));
        beast::error_code ec;
        socket.shutdown(tcp::socket::shutdown_send, ec);
      }
    } catch (const beast::system_error& e) {
      if (e.code() != websocket::error::closed && e.code() != http::error::end_of_stream && !stopping)
        spdlog::debug("connection ended: {}", e.code().message());
    } catch (const std::exception& e) {
      spdlog::warn("connection failed: {}", e.what());
    }
    track(fd, false);
  }

  void accept_loop() {
    while (!stopping) {
      beast::error_code ec;
      tcp::socket socket(ioc);
      acceptor.accept(socket, ec);
      if (ec) {
        if (stopping) break;
        spdlog::warn("accept failed: {}", ec.message());
        continue;
      }
      socket.set_option(tcp::no_delay(true), ec);
      std::lock_guard lock(mu);
      // Reap finished connections.
      std::erase_if(sessions, [](Worker& w) {
        if (!*w.done) return false;
        w.thread.join();
        return true;
      });
      auto done = std::make_shared<std::atomic<bool>>(false);
      sessions.push_back({std::thread([this, done, s = std::move(socket)]() mutable {
                            handle(std::move(s));
                            *done = true;
                          }),
                          done});
    }
  }
};

LiveServer::LiveServer(const LoadedModels& models, ServeOptions options)
    : impl_(std::make_unique<Impl>(models, std::move(options))) {}

LiveServer::~LiveServer() { stop(); }

unsigned short LiveServer::start() {
  const tcp::endpoint ep(asio::ip::make_address(impl_->options.host),
                         static_cast<unsigned short>(impl_->options.port));
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor.bind(ep);
  impl_->acceptor.listen();
  const unsigned short port = impl_->acceptor.local_endpoint().port();
  impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
  spdlog::info("serving on http://{}:{}/ (static dir {})", impl_->options.host, port,
               impl_->options.static_dir.string());
  return port;
}

void LiveServer::stop() {
  if (!impl_ || impl_->stopping.exchange(true)) return;
  if (impl_->acceptor.is_open()) {
    ::shutdown(impl_->acceptor.native_handle(), SHUT_RDWR);
    beast::error_code ec;
    impl_->acceptor.close(ec);
  }
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
  std::vector<Impl::Worker> sessions;
  {
    std::lock_guard lock(impl_->mu);
    for (int fd : impl_->open_fds) ::shutdown(fd, SHUT_RDWR);
    sessions.swap(impl_->sessions);
  }
  for (auto& w : sessions)
    if (w.thread.joinable()) w.thread.join();
}

}  // namespace hme
