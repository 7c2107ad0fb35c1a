#include "peacock/os_agent.hpp"

#include <nlohmann/json.hpp>

#include <httplib.h>

#include "peacock/agent.hpp"
#include "peacock/errors.hpp"
#include "peacock/log_entry.hpp"

namespace peacock::osagent {

CollectResult collect_from_text(const std::string& raw_log) {
    auto lines = log::split_lines(raw_log);
    if (lines.empty()) throw HeaderMissing();
    log::RawLogEntry first;
    try {
        first = log::parse_entry(lines.front());
    } catch (const MalformedLine&) {
        throw HeaderMissing();
    }
    const auto* header = std::get_if<log::HeaderBody>(&first.body);
    if (!header) throw HeaderMissing();
    return {raw_log, header->session_id};
}

CollectResult collect(const sim::SimEnvironment& env) {
    auto it = env.esp_files.find(agent::kEspLogPath);
    if (it == env.esp_files.end()) throw LogMissing();
    return collect_from_text(it->second);
}

bundle::AttestationBundle build_bundle(const std::string& raw_log, tpm::SoftTpm& tpm,
                                       const crypto::Digest32& nonce,
                                       const std::string& device_id, int pcr_index) {
    bundle::AttestationBundle b;
    b.device_id = device_id;
    b.session_id = collect_from_text(raw_log).session_id;
    b.raw_log = raw_log;
    b.ak_public = tpm.ak_public();
    b.quote = tpm.quote(pcr_index, nonce);
    b.pcr_value = b.quote.pcr_value;
    b.nonce = nonce;
    auto lines = log::split_lines(raw_log);
    b.derived_pcr_digest = log::chain_evaluate(lines).pcr;
    return b;
}

Receipt submit(const bundle::AttestationBundle& b, const std::string& server_url) {
    httplib::Client client(server_url);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(30, 0);
    auto res = client.Post("/api/v1/attest", bundle::bundle_to_json(b), "application/json");
    if (!res) throw TransportError("POST " + server_url + "/api/v1/attest failed: " +
                                   httplib::to_string(res.error()));
    Receipt receipt;
    receipt.http_status = res->status;
    receipt.body = res->body;
    try {
        auto j = nlohmann::json::parse(res->body);
        receipt.attested = j.value("attested", false);
        receipt.reason = j.value("reason", std::string{});
    } catch (const nlohmann::json::exception&) {
        // Non-JSON response bodies surface verbatim in receipt.body.
    }
    return receipt;
}

}  // namespace peacock::osagent
