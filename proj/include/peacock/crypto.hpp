#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace peacock::crypto {

using Digest32 = std::array<uint8_t, 32>;

Digest32 sha256(std::span<const uint8_t> data);
Digest32 sha256(std::string_view data);
// SHA-256 over a || b without an intermediate buffer; the hot path of chain evaluation.
Digest32 sha256_concat(std::span<const uint8_t> a, std::span<const uint8_t> b);

std::vector<uint8_t> random_bytes(std::size_t n);

// ECDSA over NIST P-256 with SHA-256 digests. Keys derive deterministically
// from a seed so test TPMs are reproducible; sign/verify go through libcrypto.
class EcdsaP256 {
  public:
    EcdsaP256(const EcdsaP256&) = delete;
    EcdsaP256& operator=(const EcdsaP256&) = delete;
    EcdsaP256(EcdsaP256&&) noexcept;
    EcdsaP256& operator=(EcdsaP256&&) noexcept;
    ~EcdsaP256();

    static EcdsaP256 from_seed(std::span<const uint8_t> seed);
    static EcdsaP256 generate();

    // 65 bytes, uncompressed SEC1 point (0x04 || X || Y).
    std::vector<uint8_t> public_key() const;
    // DER-encoded ECDSA signature over a 32-byte digest.
    std::vector<uint8_t> sign_digest(const Digest32& digest) const;

    static bool verify_digest(std::span<const uint8_t> public_key_uncompressed,
                              const Digest32& digest,
                              std::span<const uint8_t> signature);

  private:
    explicit EcdsaP256(void* pkey);
    void* pkey_;  // EVP_PKEY*
};

}  // namespace peacock::crypto
