#include "peacock/http_server.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "peacock/errors.hpp"

namespace peacock::server {

namespace {
using json = nlohmann::ordered_json;
}

class HttpServerImpl {
  public:
    httplib::Server server;
};

HttpServer::HttpServer(ServerCore& core) : core_(core), impl_(std::make_unique<HttpServerImpl>()) {
    // SO_REUSEADDR only: the library default adds SO_REUSEPORT, which would
    // let a second instance silently share an occupied port.
    impl_->server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes),
                   sizeof(yes));
    });
    install_routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::install_routes() {
    auto& svr = impl_->server;

    svr.Get("/api/v1/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"status":"ok"})", "application/json");
    });

    svr.Post("/api/v1/devices", [this](const httplib::Request& req, httplib::Response& res) {
        try {
            json body = json::parse(req.body);
            std::string device_id = body.at("device_id").get<std::string>();
            auto ak = bundle::ak_public_from_json(body.at("ak_public").dump());
            bool replace = body.value("replace", false);
            core_.register_device(device_id, ak, replace);
            res.status = 201;
            res.set_content(R"({"registered":true})", "application/json");
        } catch (const DuplicateDevice& e) {
            res.status = 409;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        }
    });

    svr.Get("/api/v1/challenge", [this](const httplib::Request& req, httplib::Response& res) {
        std::string device_id = req.get_param_value("device_id");
        try {
            Challenge ch = core_.issue_challenge(device_id);
            json body;
            body["nonce_hex"] = ch.nonce_hex;
            body["expires_at"] = ch.expires_at;
            res.set_content(body.dump(), "application/json");
        } catch (const UnknownDeviceError& e) {
            res.status = 404;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        }
    });

    svr.Post("/api/v1/attest", [this](const httplib::Request& req, httplib::Response& res) {
        IngestResponse response = core_.ingest_json(req.body);
        res.status = response.http_status;
        if (response.http_status == 400) {
            res.set_content(json{{"error", response.reason}}.dump(), "application/json");
        } else {
            res.set_content(response.to_json(), "application/json");
        }
    });

    svr.Get("/api/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        std::string device_id = req.get_param_value("device_id");
        json body = json::array();
        for (const auto& e : core_.sessions(device_id)) {
            json item;
            item["device_id"] = e.device_id;
            item["session_id"] = e.session_id;
            item["attested"] = e.attested;
            if (!e.attested) item["reason"] = e.reason;
            item["received_at"] = e.received_at;
            item["events"] = e.events;
            item["alerts"] = e.alerts;
            body.push_back(std::move(item));
        }
        res.set_content(body.dump(), "application/json");
    });
}

bool HttpServer::start(const std::string& host, int port) {
    auto& svr = impl_->server;
    host_ = host;
    if (port == 0) {
        port_ = svr.bind_to_any_port(host);
        if (port_ <= 0) return false;
    } else {
        if (!svr.bind_to_port(host, port)) return false;
        port_ = port;
    }
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    svr.wait_until_ready();
    return true;
}

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

std::string HttpServer::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

bool HttpServer::serve_forever(const std::string& host, int port) {
    host_ = host;
    port_ = port;
    return impl_->server.listen(host, port);
}

}  // namespace peacock::server
