#pragma once

#include <memory>
#include <string>
#include <thread>

#include "peacock/verifier.hpp"

namespace peacock::server {

// HTTP shell over ServerCore:
//   POST /api/v1/devices    {device_id, ak_public, replace?} -> 201 / 409
//   GET  /api/v1/challenge?device_id=...                     -> 200 / 404
//   POST /api/v1/attest     (bundle JSON)                    -> 200 / 400
//   GET  /api/v1/sessions?device_id=...                      -> 200
//   GET  /api/v1/health                                      -> 200
class HttpServer {
  public:
    explicit HttpServer(ServerCore& core);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Binds and serves on a background thread. port=0 picks a free port.
    // Returns false if the address cannot be bound.
    bool start(const std::string& host, int port);
    void stop();
    int port() const { return port_; }
    std::string url() const;

    // Blocking variant for the CLI `serve` subcommand.
    bool serve_forever(const std::string& host, int port);

  private:
    void install_routes();

    ServerCore& core_;
    std::unique_ptr<class HttpServerImpl> impl_;
    std::thread thread_;
    std::string host_;
    int port_ = 0;
};

}  // namespace peacock::server
