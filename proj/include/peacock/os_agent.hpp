#pragma once

#include <string>

#include "peacock/bundle.hpp"
#include "peacock/sim.hpp"
#include "peacock/soft_tpm.hpp"

namespace peacock::osagent {

struct CollectResult {
    std::string raw_log;
    std::string session_id;
};

// Reads the exported log from the simulated ESP and the session id from its
// header record. Throws LogMissing / HeaderMissing.
CollectResult collect(const sim::SimEnvironment& env);
CollectResult collect_from_text(const std::string& raw_log);

// Assembles the attestation bundle: quotes the PCR under the given nonce and
// recomputes the chain client-side. Performs no verification by design.
bundle::AttestationBundle build_bundle(const std::string& raw_log, tpm::SoftTpm& tpm,
                                       const crypto::Digest32& nonce,
                                       const std::string& device_id, int pcr_index = 23);

struct Receipt {
    int http_status = 0;
    bool attested = false;
    std::string reason;
    std::string body;  // full server response JSON
};

// POSTs the bundle to <server_url>/api/v1/attest. No silent retries; throws
// TransportError when the server is unreachable.
Receipt submit(const bundle::AttestationBundle& b, const std::string& server_url);

}  // namespace peacock::osagent
