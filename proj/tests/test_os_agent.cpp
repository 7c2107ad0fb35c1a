#include <doctest.h>

#include "helpers.hpp"
#include "peacock/encoding.hpp"
#include "peacock/errors.hpp"
#include "peacock/os_agent.hpp"

using namespace peacock;
using namespace peacock::osagent;

TEST_CASE("collect returns the log and a valid session UUID") {
    auto run = test_helpers::run_builtin("baseline");
    auto collected = collect(run.env);
    CHECK_FALSE(collected.raw_log.empty());
    REQUIRE(collected.session_id.size() == 36);
    CHECK(collected.session_id[8] == '-');
    CHECK(collected.session_id[14] == '4');  // UUID version nibble
    CHECK(collected.session_id == run.session_id);
}

TEST_CASE("empty ESP means LogMissing") {
    auto env = sim::build_environment({"v", "1", "d"});
    CHECK_THROWS_AS(collect(env), LogMissing);
}

TEST_CASE("log without a leading header record means HeaderMissing") {
    auto run = test_helpers::run_builtin("baseline");
    auto lines = log::split_lines(run.raw_log);
    std::string stripped;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (i > 1) stripped += '\n';
        stripped += lines[i];
    }
    CHECK_THROWS_AS(collect_from_text(stripped), HeaderMissing);
    CHECK_THROWS_AS(collect_from_text(""), HeaderMissing);
}

TEST_CASE("honest bundle: derived digest equals the quoted PCR value") {
    auto run = test_helpers::run_builtin("baseline");
    crypto::Digest32 nonce{};
    nonce.fill(0x42);
    auto b = build_bundle(run.raw_log, run.tpm, nonce, "dev-1");
    CHECK(b.derived_pcr_digest == b.pcr_value);
    CHECK(b.pcr_value == b.quote.pcr_value);
    CHECK(b.session_id == run.session_id);
    CHECK(b.raw_log == run.raw_log);  // collection never mutates log bytes
}

TEST_CASE("tampered log after boot: client still submits, digests diverge") {
    auto run = test_helpers::run_builtin("baseline");
    std::string tampered = run.raw_log;
    tampered[tampered.size() / 2] ^= 0x01;
    crypto::Digest32 nonce{};
    auto b = build_bundle(tampered, run.tpm, nonce, "dev-1");
    // no client-side rejection; the mismatch is the server's to find
    CHECK(b.derived_pcr_digest != b.pcr_value);
}

TEST_CASE("bundle JSON round-trips exactly") {
    auto run = test_helpers::run_builtin("glupteba");
    crypto::Digest32 nonce{};
    nonce.fill(0x7E);
    auto b = build_bundle(run.raw_log, run.tpm, nonce, "dev-1");
    auto text = bundle::bundle_to_json(b);
    auto back = bundle::bundle_from_json(text);
    CHECK(back.device_id == b.device_id);
    CHECK(back.session_id == b.session_id);
    CHECK(back.raw_log == b.raw_log);
    CHECK(back.ak_public.key == b.ak_public.key);
    CHECK(back.quote.signature == b.quote.signature);
    CHECK(back.quote.counter == b.quote.counter);
    CHECK(back.pcr_value == b.pcr_value);
    CHECK(back.nonce == b.nonce);
    CHECK(back.derived_pcr_digest == b.derived_pcr_digest);
    CHECK(bundle::bundle_to_json(back) == text);
}

TEST_CASE("bundle field names follow the documented schema") {
    auto run = test_helpers::run_builtin("baseline");
    crypto::Digest32 nonce{};
    auto text = bundle::bundle_to_json(build_bundle(run.raw_log, run.tpm, nonce, "dev-1"));
    for (const char* field :
         {"\"device_id\"", "\"session_id\"", "\"raw_log\"", "\"ak_public\"", "\"algorithm\"",
          "\"key_b64\"", "\"created_at\"", "\"quote\"", "\"magic\"", "\"pcr_index\"",
          "\"pcr_value_hex\"", "\"nonce_hex\"", "\"counter\"", "\"signature_b64\"",
          "\"derived_pcr_digest_hex\""}) {
        CAPTURE(field);
        CHECK(text.find(field) != std::string::npos);
    }
}

TEST_CASE("unreachable server raises TransportError") {
    auto run = test_helpers::run_builtin("baseline");
    crypto::Digest32 nonce{};
    auto b = build_bundle(run.raw_log, run.tpm, nonce, "dev-1");
    CHECK_THROWS_AS(submit(b, "http://127.0.0.1:1"), TransportError);
}
