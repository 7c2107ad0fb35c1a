#include "peacock/bundle.hpp"

#include <cstring>

#include <nlohmann/json.hpp>

#include "peacock/encoding.hpp"
#include "peacock/errors.hpp"

namespace peacock::bundle {

namespace {

using json = nlohmann::ordered_json;

crypto::Digest32 digest_from_hex(const std::string& hex, const char* field) {
    auto bytes = encoding::from_hex(hex);
    if (bytes.size() != 32) throw Error(std::string(field) + " must be 32 bytes of hex");
    crypto::Digest32 out;
    std::memcpy(out.data(), bytes.data(), 32);
    return out;
}

json ak_to_json_obj(const tpm::AkPublic& ak) {
    json j;
    j["algorithm"] = ak.algorithm;
    j["key_b64"] = encoding::base64_encode(ak.key);
    j["device_id"] = ak.device_id;
    j["created_at"] = ak.created_at;
    return j;
}

tpm::AkPublic ak_from_json_obj(const json& j) {
    tpm::AkPublic ak;
    ak.algorithm = j.at("algorithm").get<std::string>();
    ak.key = encoding::base64_decode(j.at("key_b64").get<std::string>());
    ak.device_id = j.at("device_id").get<std::string>();
    ak.created_at = j.at("created_at").get<std::string>();
    return ak;
}

json quote_to_json_obj(const tpm::Quote& q) {
    json j;
    j["magic"] = q.magic;
    j["device_id"] = q.device_id;
    j["pcr_index"] = q.pcr_index;
    j["pcr_value_hex"] = encoding::to_hex(q.pcr_value);
    j["nonce_hex"] = encoding::to_hex(q.nonce);
    j["counter"] = q.counter;
    j["signature_b64"] = encoding::base64_encode(q.signature);
    return j;
}

tpm::Quote quote_from_json_obj(const json& j) {
    tpm::Quote q;
    q.magic = j.at("magic").get<std::string>();
    q.device_id = j.at("device_id").get<std::string>();
    q.pcr_index = j.at("pcr_index").get<int>();
    q.pcr_value = digest_from_hex(j.at("pcr_value_hex").get<std::string>(), "quote.pcr_value_hex");
    q.nonce = digest_from_hex(j.at("nonce_hex").get<std::string>(), "quote.nonce_hex");
    q.counter = j.at("counter").get<uint64_t>();
    q.signature = encoding::base64_decode(j.at("signature_b64").get<std::string>());
    return q;
}

}  // namespace

std::string bundle_to_json(const AttestationBundle& b) {
    json j;
    j["device_id"] = b.device_id;
    j["session_id"] = b.session_id;
    j["raw_log"] = b.raw_log;
    j["ak_public"] = ak_to_json_obj(b.ak_public);
    j["quote"] = quote_to_json_obj(b.quote);
    j["pcr_value_hex"] = encoding::to_hex(b.pcr_value);
    j["nonce_hex"] = encoding::to_hex(b.nonce);
    j["derived_pcr_digest_hex"] = encoding::to_hex(b.derived_pcr_digest);
    return j.dump(2);
}

AttestationBundle bundle_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("invalid bundle JSON: ") + e.what());
    }
    try {
        AttestationBundle b;
        b.device_id = j.at("device_id").get<std::string>();
        b.session_id = j.at("session_id").get<std::string>();
        b.raw_log = j.at("raw_log").get<std::string>();
        b.ak_public = ak_from_json_obj(j.at("ak_public"));
        b.quote = quote_from_json_obj(j.at("quote"));
        b.pcr_value = digest_from_hex(j.at("pcr_value_hex").get<std::string>(), "pcr_value_hex");
        b.nonce = digest_from_hex(j.at("nonce_hex").get<std::string>(), "nonce_hex");
        b.derived_pcr_digest = digest_from_hex(j.at("derived_pcr_digest_hex").get<std::string>(),
                                               "derived_pcr_digest_hex");
        return b;
    } catch (const json::exception& e) {
        throw Error(std::string("invalid bundle document: ") + e.what());
    }
}

std::string ak_public_to_json(const tpm::AkPublic& ak) { return ak_to_json_obj(ak).dump(2); }

tpm::AkPublic ak_public_from_json(const std::string& text) {
    try {
        return ak_from_json_obj(json::parse(text));
    } catch (const json::exception& e) {
        throw Error(std::string("invalid ak_public document: ") + e.what());
    }
}

}  // namespace peacock::bundle
