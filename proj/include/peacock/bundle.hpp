#pragma once

#include <string>

#include "peacock/soft_tpm.hpp"

namespace peacock::bundle {

// The attestation package the OS agent submits: raw log, AK public key and
// metadata, the quote, the quoted PCR value, the nonce, and the client-side
// chain recomputation (informational; the server recomputes independently).
struct AttestationBundle {
    std::string device_id;
    std::string session_id;
    std::string raw_log;
    tpm::AkPublic ak_public;
    tpm::Quote quote;
    crypto::Digest32 pcr_value{};
    crypto::Digest32 nonce{};
    crypto::Digest32 derived_pcr_digest{};
};

std::string bundle_to_json(const AttestationBundle& b);
AttestationBundle bundle_from_json(const std::string& text);  // throws Error on schema violations

std::string ak_public_to_json(const tpm::AkPublic& ak);
tpm::AkPublic ak_public_from_json(const std::string& text);

}  // namespace peacock::bundle
