#include "peacock/crypto.hpp"

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/param_build.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <cstring>

#include "peacock/errors.hpp"

namespace peacock::crypto {

namespace {

[[noreturn]] void fail(const char* what) {
    unsigned long code = ERR_get_error();
    char buf[256] = {0};
    if (code != 0) ERR_error_string_n(code, buf, sizeof(buf));
    throw Error(std::string("crypto: ") + what + (buf[0] ? std::string(": ") + buf : ""));
}

struct PkeyCtxDeleter {
    void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
using PkeyCtx = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;

// P-256 group order, for reducing seed-derived scalars into [1, n-1].
constexpr char kP256Order[] =
    "FFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551";

EVP_PKEY* pkey_from_parts(const std::vector<uint8_t>& pub_point, const BIGNUM* priv) {
    OSSL_PARAM_BLD* bld = OSSL_PARAM_BLD_new();
    if (!bld) fail("OSSL_PARAM_BLD_new");
    OSSL_PARAM_BLD_push_utf8_string(bld, OSSL_PKEY_PARAM_GROUP_NAME, "prime256v1", 0);
    OSSL_PARAM_BLD_push_octet_string(bld, OSSL_PKEY_PARAM_PUB_KEY, pub_point.data(),
                                     pub_point.size());
    if (priv) OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_PRIV_KEY, priv);
    OSSL_PARAM* params = OSSL_PARAM_BLD_to_param(bld);
    OSSL_PARAM_BLD_free(bld);
    if (!params) fail("OSSL_PARAM_BLD_to_param");

    PkeyCtx ctx(EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr));
    EVP_PKEY* pkey = nullptr;
    if (!ctx || EVP_PKEY_fromdata_init(ctx.get()) <= 0 ||
        EVP_PKEY_fromdata(ctx.get(), &pkey, priv ? EVP_PKEY_KEYPAIR : EVP_PKEY_PUBLIC_KEY,
                          params) <= 0) {
        OSSL_PARAM_free(params);
        fail("EVP_PKEY_fromdata");
    }
    OSSL_PARAM_free(params);
    return pkey;
}

std::vector<uint8_t> point_from_scalar(const BIGNUM* priv) {
    EC_GROUP* group = EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1);
    if (!group) fail("EC_GROUP_new");
    EC_POINT* point = EC_POINT_new(group);
    std::vector<uint8_t> out(65);
    if (!point || EC_POINT_mul(group, point, priv, nullptr, nullptr, nullptr) != 1 ||
        EC_POINT_point2oct(group, point, POINT_CONVERSION_UNCOMPRESSED, out.data(), out.size(),
                           nullptr) != 65) {
        EC_POINT_free(point);
        EC_GROUP_free(group);
        fail("EC_POINT_mul");
    }
    EC_POINT_free(point);
    EC_GROUP_free(group);
    return out;
}

}  // namespace

Digest32 sha256(std::span<const uint8_t> data) {
    Digest32 out;
    SHA256(data.data(), data.size(), out.data());
    return out;
}

Digest32 sha256(std::string_view data) {
    return sha256(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(data.data()),
                                           data.size()));
}

Digest32 sha256_concat(std::span<const uint8_t> a, std::span<const uint8_t> b) {
    Digest32 out;
    SHA256_CTX ctx;
    SHA256_Init(&ctx);
    SHA256_Update(&ctx, a.data(), a.size());
    SHA256_Update(&ctx, b.data(), b.size());
    SHA256_Final(out.data(), &ctx);
    return out;
}

std::vector<uint8_t> random_bytes(std::size_t n) {
    std::vector<uint8_t> out(n);
    if (RAND_bytes(out.data(), static_cast<int>(n)) != 1) fail("RAND_bytes");
    return out;
}

EcdsaP256::EcdsaP256(void* pkey) : pkey_(pkey) {}

EcdsaP256::EcdsaP256(EcdsaP256&& other) noexcept : pkey_(other.pkey_) { other.pkey_ = nullptr; }

EcdsaP256& EcdsaP256::operator=(EcdsaP256&& other) noexcept {
    if (this != &other) {
        EVP_PKEY_free(static_cast<EVP_PKEY*>(pkey_));
        pkey_ = other.pkey_;
        other.pkey_ = nullptr;
    }
    return *this;
}

EcdsaP256::~EcdsaP256() { EVP_PKEY_free(static_cast<EVP_PKEY*>(pkey_)); }

EcdsaP256 EcdsaP256::from_seed(std::span<const uint8_t> seed) {
    BIGNUM* order = nullptr;
    if (BN_hex2bn(&order, kP256Order) == 0) fail("BN_hex2bn");

    // d = SHA256(seed || counter) mod (n-1) + 1, retried until nonzero pre-reduction.
    BIGNUM* priv = BN_new();
    BIGNUM* nm1 = BN_new();
    BN_CTX* bnctx = BN_CTX_new();
    if (!priv || !nm1 || !bnctx) fail("BN_new");
    BN_sub(nm1, order, BN_value_one());
    for (uint8_t counter = 0;; ++counter) {
        std::vector<uint8_t> material(seed.begin(), seed.end());
        material.push_back(counter);
        Digest32 d = sha256(material);
        BN_bin2bn(d.data(), static_cast<int>(d.size()), priv);
        if (!BN_is_zero(priv)) break;
    }
    BN_mod(priv, priv, nm1, bnctx);
    BN_add(priv, priv, BN_value_one());
    BN_CTX_free(bnctx);
    BN_free(nm1);
    BN_free(order);

    std::vector<uint8_t> pub = point_from_scalar(priv);
    EVP_PKEY* pkey = pkey_from_parts(pub, priv);
    BN_clear_free(priv);
    return EcdsaP256(pkey);
}

EcdsaP256 EcdsaP256::generate() {
    auto seed = random_bytes(32);
    return from_seed(seed);
}

std::vector<uint8_t> EcdsaP256::public_key() const {
    auto* pkey = static_cast<EVP_PKEY*>(pkey_);
    size_t len = 0;
    if (EVP_PKEY_get_octet_string_param(pkey, OSSL_PKEY_PARAM_PUB_KEY, nullptr, 0, &len) != 1)
        fail("get pub len");
    std::vector<uint8_t> raw(len);
    if (EVP_PKEY_get_octet_string_param(pkey, OSSL_PKEY_PARAM_PUB_KEY, raw.data(), raw.size(),
                                        &len) != 1)
        fail("get pub");
    raw.resize(len);

    // The param export uses the key's point format (compressed by default);
    // re-encode through EC_POINT for the fixed 65-byte uncompressed form.
    EC_GROUP* group = EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1);
    EC_POINT* point = group ? EC_POINT_new(group) : nullptr;
    std::vector<uint8_t> out(65);
    bool ok = point &&
              EC_POINT_oct2point(group, point, raw.data(), raw.size(), nullptr) == 1 &&
              EC_POINT_point2oct(group, point, POINT_CONVERSION_UNCOMPRESSED, out.data(),
                                 out.size(), nullptr) == 65;
    EC_POINT_free(point);
    EC_GROUP_free(group);
    if (!ok) fail("pub point re-encode");
    return out;
}

std::vector<uint8_t> EcdsaP256::sign_digest(const Digest32& digest) const {
    PkeyCtx ctx(EVP_PKEY_CTX_new(static_cast<EVP_PKEY*>(pkey_), nullptr));
    if (!ctx || EVP_PKEY_sign_init(ctx.get()) <= 0) fail("sign_init");
    size_t len = 0;
    if (EVP_PKEY_sign(ctx.get(), nullptr, &len, digest.data(), digest.size()) <= 0)
        fail("sign size");
    std::vector<uint8_t> sig(len);
    if (EVP_PKEY_sign(ctx.get(), sig.data(), &len, digest.data(), digest.size()) <= 0)
        fail("sign");
    sig.resize(len);
    return sig;
}

bool EcdsaP256::verify_digest(std::span<const uint8_t> public_key_uncompressed,
                              const Digest32& digest, std::span<const uint8_t> signature) {
    if (public_key_uncompressed.size() != 65 || public_key_uncompressed[0] != 0x04) return false;
    EVP_PKEY* pkey = nullptr;
    try {
        std::vector<uint8_t> pub(public_key_uncompressed.begin(), public_key_uncompressed.end());
        pkey = pkey_from_parts(pub, nullptr);
    } catch (const Error&) {
        return false;
    }
    PkeyCtx ctx(EVP_PKEY_CTX_new(pkey, nullptr));
    bool ok = ctx && EVP_PKEY_verify_init(ctx.get()) > 0 &&
              EVP_PKEY_verify(ctx.get(), signature.data(), signature.size(), digest.data(),
                              digest.size()) == 1;
    EVP_PKEY_free(pkey);
    if (!ok) ERR_clear_error();
    return ok;
}

}  // namespace peacock::crypto
