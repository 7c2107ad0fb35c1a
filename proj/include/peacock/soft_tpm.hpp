#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "peacock/crypto.hpp"

namespace peacock::tpm {

inline constexpr int kPcrCount = 24;
inline constexpr char kQuoteMagic[4] = {'P', 'C', 'K', '1'};
inline constexpr char kAlgorithmEcdsaP256[] = "ecdsa-p256-sha256";

struct AkPublic {
    std::string algorithm = kAlgorithmEcdsaP256;
    std::vector<uint8_t> key;  // uncompressed SEC1 point, 65 bytes
    std::string device_id;
    std::string created_at;  // ISO 8601 UTC
    bool operator==(const AkPublic&) const = default;
};

struct Quote {
    std::string magic = "PCK1";
    std::string device_id;
    int pcr_index = 0;
    crypto::Digest32 pcr_value{};
    crypto::Digest32 nonce{};
    uint64_t counter = 0;
    std::vector<uint8_t> signature;  // DER ECDSA over SHA-256(payload)
};

// Canonical quote payload:
//   magic || len(device_id) as u32 BE || device_id || pcr_index (1 byte)
//   || pcr_value || nonce || counter as u64 BE
std::vector<uint8_t> quote_payload(const Quote& q);

enum class QuoteReject { BadSignature, NonceMismatch };

struct QuoteVerdict {
    bool accepted = false;
    std::optional<QuoteReject> reason;
};

QuoteVerdict verify_quote(const AkPublic& ak, const Quote& quote,
                          const crypto::Digest32& expected_nonce);

// PCR bank + attestation key + monotone quote counter. Deterministic when
// seeded, so tests can pin key material; no reset operation exists by design.
class SoftTpm {
  public:
    SoftTpm(std::string device_id, uint64_t rng_seed);
    static SoftTpm with_random_seed(std::string device_id);

    const std::string& device_id() const { return device_id_; }
    crypto::Digest32 pcr_read(int index) const;  // throws InvalidPcrIndex
    crypto::Digest32 pcr_extend(int index, const crypto::Digest32& measurement);
    Quote quote(int index, std::span<const uint8_t> nonce);  // throws BadNonceLength
    AkPublic ak_public() const;
    uint64_t quote_counter() const { return counter_; }

    // Device-state persistence for the CLI (attest after a separate run process).
    std::string state_to_json() const;
    static SoftTpm state_from_json(const std::string& text);

  private:
    std::string device_id_;
    uint64_t seed_;
    std::array<crypto::Digest32, kPcrCount> pcrs_{};
    uint64_t counter_ = 0;
    std::string created_at_;
    std::shared_ptr<crypto::EcdsaP256> ak_;
};

}  // namespace peacock::tpm
