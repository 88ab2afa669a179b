/*
 * Copyright 2026 The envmx Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file serve.hpp
 * @brief Read-only local HTTP server for a result bundle and the dashboard
 *        static assets.
 */

#pragma once

#include <cstdio>
#include <filesystem>
#include <string>

#include "httplib.h"

#include "envmx/common.hpp"

namespace envmx {

struct ServeOptions {
  std::string bundle_path;
  std::string assets_dir;  // optional
  std::string host = "127.0.0.1";
  int port = 8765;
};

/// Configures `server`; the bundle is re-read per request so edits on disk show up.
inline void configure_server(httplib::Server& server, const ServeOptions& opt) {
  if (!std::filesystem::is_regular_file(opt.bundle_path)) {
    throw IoError("bundle not found: " + opt.bundle_path);
  }
  const std::string bundle = opt.bundle_path;
  // SO_REUSEPORT (httplib's default) would let a second server share a busy port.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
  });
  server.Get("/bundle.json", [bundle](const httplib::Request&, httplib::Response& res) {
    try {
      res.set_content(read_file(bundle), "application/json");
    } catch (const Error& e) {
      res.status = 500;
      res.set_content(e.what(), "text/plain");
    }
  });
  if (!opt.assets_dir.empty()) {
    if (!server.set_mount_point("/", opt.assets_dir)) {
      throw IoError("assets directory not found: " + opt.assets_dir);
    }
  }
  server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    std::fprintf(stderr, "%s %s %d\n", req.method.c_str(), req.path.c_str(), res.status);
  });
}

/// Binds and serves until stopped. Returns false when the port cannot be bound.
inline bool serve(const ServeOptions& opt) {
  httplib::Server server;
  configure_server(server, opt);
  if (!server.bind_to_port(opt.host, opt.port)) return false;
  std::fprintf(stderr, "serving %s on http://%s:%d/\n", opt.bundle_path.c_str(), opt.host.c_str(), opt.port);
  return server.listen_after_bind();
}

}  // namespace envmx
