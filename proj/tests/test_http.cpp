#include <doctest.h>

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "peacock/http_server.hpp"
#include "peacock/os_agent.hpp"

using namespace peacock;
using namespace peacock::server;
using test_helpers::TempDir;
using json = nlohmann::json;

namespace {

struct LiveServer {
    TempDir dir;
    ServerCore core;
    HttpServer http;

    LiveServer()
        : dir("http"), core(test_helpers::server_config(dir)), http(core) {
        REQUIRE(http.start("127.0.0.1", 0));
    }
    ~LiveServer() { http.stop(); }
    httplib::Client client() { return httplib::Client("127.0.0.1", http.port()); }
};

}  // namespace

TEST_CASE("health endpoint answers") {
    LiveServer s;
    auto res = s.client().Get("/api/v1/health");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body).at("status") == "ok");
}

TEST_CASE("enrollment over HTTP: 201 then 409, challenge 404 for strangers") {
    LiveServer s;
    tpm::SoftTpm t("dev-9", 1);
    json body;
    body["device_id"] = "dev-9";
    body["ak_public"] = json::parse(bundle::ak_public_to_json(t.ak_public()));

    auto client = s.client();
    auto res = client.Post("/api/v1/devices", body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    res = client.Post("/api/v1/devices", body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 409);
    body["replace"] = true;
    res = client.Post("/api/v1/devices", body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);

    auto challenge = client.Get("/api/v1/challenge?device_id=dev-9");
    REQUIRE(challenge);
    CHECK(challenge->status == 200);
    auto ch = json::parse(challenge->body);
    CHECK(ch.at("nonce_hex").get<std::string>().size() == 64);
    CHECK(ch.contains("expires_at"));

    auto unknown = client.Get("/api/v1/challenge?device_id=ghost");
    REQUIRE(unknown);
    CHECK(unknown->status == 404);

    auto malformed = client.Post("/api/v1/devices", "{", "application/json");
    REQUIRE(malformed);
    CHECK(malformed->status == 400);
}

TEST_CASE("full attestation flow over the wire") {
    LiveServer s;
    auto run = test_helpers::run_builtin("glupteba", {}, "dev-net", 55);

    // enroll
    json body;
    body["device_id"] = "dev-net";
    body["ak_public"] = json::parse(bundle::ak_public_to_json(run.tpm.ak_public()));
    auto client = s.client();
    REQUIRE(client.Post("/api/v1/devices", body.dump(), "application/json")->status == 201);

    // challenge
    auto ch = json::parse(client.Get("/api/v1/challenge?device_id=dev-net")->body);
    auto nonce_bytes = encoding::from_hex(ch.at("nonce_hex").get<std::string>());
    crypto::Digest32 nonce{};
    std::copy(nonce_bytes.begin(), nonce_bytes.end(), nonce.begin());

    // submit via the OS agent client
    auto b = osagent::build_bundle(run.raw_log, run.tpm, nonce, "dev-net");
    auto receipt = osagent::submit(b, s.http.url());
    CHECK(receipt.http_status == 200);
    CHECK(receipt.attested);
    auto parsed = json::parse(receipt.body);
    CHECK(parsed.at("alerts").get<int>() >= 1);

    // session listing reflects it
    auto sessions = json::parse(client.Get("/api/v1/sessions?device_id=dev-net")->body);
    REQUIRE(sessions.size() == 1);
    CHECK(sessions[0].at("attested") == true);

    // tampered resubmission with a fresh nonce fails as ChainMismatch
    // (mutate past the header line so the client can still read the session id)
    auto ch2 = json::parse(client.Get("/api/v1/challenge?device_id=dev-net")->body);
    auto nb2 = encoding::from_hex(ch2.at("nonce_hex").get<std::string>());
    crypto::Digest32 nonce2{};
    std::copy(nb2.begin(), nb2.end(), nonce2.begin());
    std::string tampered = run.raw_log;
    tampered[tampered.find('\n') + 10] ^= 0x01;
    auto bad = osagent::build_bundle(tampered, run.tpm, nonce2, "dev-net");
    auto bad_receipt = osagent::submit(bad, s.http.url());
    CHECK(bad_receipt.http_status == 200);
    CHECK_FALSE(bad_receipt.attested);
    CHECK(bad_receipt.reason == "ChainMismatch");
}

TEST_CASE("malformed attest body is HTTP 400") {
    LiveServer s;
    auto res = s.client().Post("/api/v1/attest", "{oops", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
}

TEST_CASE("occupied port cannot be bound twice") {
    LiveServer s;
    TempDir dir2("http2");
    ServerCore core2(test_helpers::server_config(dir2));
    HttpServer second(core2);
    CHECK_FALSE(second.start("127.0.0.1", s.http.port()));
}
