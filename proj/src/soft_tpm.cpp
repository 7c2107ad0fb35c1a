#include "peacock/soft_tpm.hpp"

#include <chrono>
#include <cstring>

#include <nlohmann/json.hpp>

#include "peacock/encoding.hpp"
#include "peacock/errors.hpp"

namespace peacock::tpm {

namespace {

using json = nlohmann::ordered_json;

void check_index(int index) {
    if (index < 0 || index >= kPcrCount) throw InvalidPcrIndex(index);
}

std::vector<uint8_t> ak_seed_material(const std::string& device_id, uint64_t seed) {
    std::vector<uint8_t> material;
    const char tag[] = "peacock-ak-v1";
    material.insert(material.end(), tag, tag + sizeof(tag) - 1);
    material.insert(material.end(), device_id.begin(), device_id.end());
    for (int i = 0; i < 8; ++i) material.push_back(static_cast<uint8_t>(seed >> (8 * i)));
    return material;
}

std::string utc_now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::vector<uint8_t> quote_payload(const Quote& q) {
    std::vector<uint8_t> out;
    out.insert(out.end(), q.magic.begin(), q.magic.end());
    uint32_t len = static_cast<uint32_t>(q.device_id.size());
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<uint8_t>(len >> (8 * i)));
    out.insert(out.end(), q.device_id.begin(), q.device_id.end());
    out.push_back(static_cast<uint8_t>(q.pcr_index));
    out.insert(out.end(), q.pcr_value.begin(), q.pcr_value.end());
    out.insert(out.end(), q.nonce.begin(), q.nonce.end());
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<uint8_t>(q.counter >> (8 * i)));
    return out;
}

QuoteVerdict verify_quote(const AkPublic& ak, const Quote& quote,
                          const crypto::Digest32& expected_nonce) {
    QuoteVerdict verdict;
    auto digest = crypto::sha256(quote_payload(quote));
    if (quote.magic != std::string(kQuoteMagic, 4) ||
        !crypto::EcdsaP256::verify_digest(ak.key, digest, quote.signature)) {
        verdict.reason = QuoteReject::BadSignature;
        return verdict;
    }
    if (quote.nonce != expected_nonce) {
        verdict.reason = QuoteReject::NonceMismatch;
        return verdict;
    }
    verdict.accepted = true;
    return verdict;
}

SoftTpm::SoftTpm(std::string device_id, uint64_t rng_seed)
    : device_id_(std::move(device_id)),
      seed_(rng_seed),
      created_at_(utc_now_iso8601()),
      ak_(std::make_shared<crypto::EcdsaP256>(
          crypto::EcdsaP256::from_seed(ak_seed_material(device_id_, rng_seed)))) {}

SoftTpm SoftTpm::with_random_seed(std::string device_id) {
    auto bytes = crypto::random_bytes(8);
    uint64_t seed = 0;
    for (int i = 0; i < 8; ++i) seed = (seed << 8) | bytes[i];
    return SoftTpm(std::move(device_id), seed);
}

crypto::Digest32 SoftTpm::pcr_read(int index) const {
    check_index(index);
    return pcrs_[index];
}

crypto::Digest32 SoftTpm::pcr_extend(int index, const crypto::Digest32& measurement) {
    check_index(index);
    pcrs_[index] = crypto::sha256_concat(pcrs_[index], measurement);
    return pcrs_[index];
}

Quote SoftTpm::quote(int index, std::span<const uint8_t> nonce) {
    check_index(index);
    if (nonce.size() != 32) throw BadNonceLength(nonce.size());
    Quote q;
    q.device_id = device_id_;
    q.pcr_index = index;
    q.pcr_value = pcrs_[index];
    std::memcpy(q.nonce.data(), nonce.data(), 32);
    q.counter = ++counter_;
    q.signature = ak_->sign_digest(crypto::sha256(quote_payload(q)));
    return q;
}

AkPublic SoftTpm::ak_public() const {
    AkPublic ak;
    ak.key = ak_->public_key();
    ak.device_id = device_id_;
    ak.created_at = created_at_;
    return ak;
}

std::string SoftTpm::state_to_json() const {
    json j;
    j["device_id"] = device_id_;
    j["seed"] = seed_;
    j["counter"] = counter_;
    j["created_at"] = created_at_;
    json pcrs = json::array();
    for (const auto& p : pcrs_) pcrs.push_back(encoding::to_hex(p));
    j["pcrs"] = std::move(pcrs);
    return j.dump(2);
}

SoftTpm SoftTpm::state_from_json(const std::string& text) {
    json j = json::parse(text);
    SoftTpm tpm(j.at("device_id").get<std::string>(), j.at("seed").get<uint64_t>());
    tpm.counter_ = j.at("counter").get<uint64_t>();
    tpm.created_at_ = j.at("created_at").get<std::string>();
    const auto& pcrs = j.at("pcrs");
    if (pcrs.size() != kPcrCount) throw Error("tpm state: expected 24 PCRs");
    for (int i = 0; i < kPcrCount; ++i) {
        auto bytes = encoding::from_hex(pcrs[i].get<std::string>());
        if (bytes.size() != 32) throw Error("tpm state: PCR must be 32 bytes");
        std::memcpy(tpm.pcrs_[i].data(), bytes.data(), 32);
    }
    return tpm;
}

}  // namespace peacock::tpm
