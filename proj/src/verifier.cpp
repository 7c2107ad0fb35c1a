#include "peacock/verifier.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "peacock/encoding.hpp"
#include "peacock/errors.hpp"
#include "peacock/log_entry.hpp"

namespace peacock::server {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string utc_iso8601(int64_t epoch_seconds) {
    std::time_t t = static_cast<std::time_t>(epoch_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int64_t wall_clock_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

// Session/device ids come from unverified input and end up in paths.
std::string path_component(const std::string& raw) {
    std::string out;
    for (char c : raw) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '-' || c == '_' || c == '.';
        out.push_back(ok ? c : '_');
        if (out.size() >= 64) break;
    }
    if (out.empty() || out == "." || out == "..") out = "_";
    return out;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("short write to " + path.string());
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

json index_entry_to_json(const SessionIndexEntry& e) {
    json j;
    j["device_id"] = e.device_id;
    j["session_id"] = e.session_id;
    j["attested"] = e.attested;
    if (!e.attested) j["reason"] = e.reason;
    j["received_at"] = e.received_at;
    j["events"] = e.events;
    j["alerts"] = e.alerts;
    return j;
}

SessionIndexEntry index_entry_from_json(const json& j) {
    SessionIndexEntry e;
    e.device_id = j.at("device_id").get<std::string>();
    e.session_id = j.at("session_id").get<std::string>();
    e.attested = j.at("attested").get<bool>();
    e.reason = j.value("reason", std::string{});
    e.received_at = j.at("received_at").get<std::string>();
    e.events = j.value("events", std::size_t{0});
    e.alerts = j.value("alerts", std::size_t{0});
    return e;
}

}  // namespace

std::string_view failure_reason_text(FailureReason r) {
    switch (r) {
        case FailureReason::UnknownDevice: return "UnknownDevice";
        case FailureReason::BadSignature: return "BadSignature";
        case FailureReason::NonceMismatch: return "NonceMismatch";
        case FailureReason::NonceExpiredOrReplayed: return "NonceExpiredOrReplayed";
        case FailureReason::PcrDigestInconsistent: return "PcrDigestInconsistent";
        case FailureReason::ChainMismatch: return "ChainMismatch";
    }
    return "Unknown";
}

std::string IngestResponse::to_json() const {
    json j;
    j["attested"] = attested;
    if (!attested && !reason.empty()) j["reason"] = reason;
    if (attested) {
        j["events"] = events;
        j["alerts"] = alerts;
    }
    return j.dump();
}

std::string failure_record_json(const SessionIndexEntry& entry) {
    json j;
    j["device_id"] = entry.device_id;
    j["session_id"] = entry.session_id;
    j["verdict"] = "attestation_failed";
    j["reason"] = entry.reason;
    j["received_at"] = entry.received_at;
    return j.dump();
}

ServerCore::ServerCore(ServerConfig config, Clock clock)
    : config_(std::move(config)), clock_(clock ? std::move(clock) : Clock(wall_clock_seconds)) {
    fs::create_directories(config_.data_dir);
    fs::create_directories(config_.sink_dir);
    load_state();
}

void ServerCore::load_state() {
    fs::path devices = fs::path(config_.data_dir) / "devices.json";
    if (fs::exists(devices)) {
        json j = json::parse(read_text_file(devices));
        for (const auto& [id, rec] : j.items()) {
            registry_[id] = {bundle::ak_public_from_json(rec.at("ak_public").dump()),
                             rec.at("enrolled_at").get<std::string>()};
        }
    }
    // Challenge state is an append-only journal: one JSON object per event.
    fs::path challenges = fs::path(config_.data_dir) / "challenges.ndjson";
    if (fs::exists(challenges)) {
        std::ifstream in(challenges);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json rec = json::parse(line);
            std::string op = rec.at("op").get<std::string>();
            if (op == "issue") {
                ChallengeRecord r;
                r.device_id = rec.at("device_id").get<std::string>();
                r.issued_at = rec.at("issued_at").get<int64_t>();
                r.ttl = rec.at("ttl").get<int64_t>();
                challenges_[rec.at("nonce").get<std::string>()] = std::move(r);
            } else if (op == "consume") {
                auto it = challenges_.find(rec.at("nonce").get<std::string>());
                if (it != challenges_.end()) it->second.consumed = true;
            } else if (op == "legacy") {
                legacy_replay_.insert(rec.at("nonce").get<std::string>());
            }
        }
    }
    fs::path index = fs::path(config_.data_dir) / "index.ndjson";
    if (fs::exists(index)) {
        std::ifstream in(index);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            index_.push_back(index_entry_from_json(json::parse(line)));
        }
    }
}

void ServerCore::persist_registry_locked() {
    json j = json::object();
    for (const auto& [id, rec] : registry_) {
        j[id] = {{"ak_public", json::parse(bundle::ak_public_to_json(rec.first))},
                 {"enrolled_at", rec.second}};
    }
    write_text_file(fs::path(config_.data_dir) / "devices.json", j.dump(2));
}

void ServerCore::append_challenge_journal_locked(const std::string& record) {
    std::ofstream out(fs::path(config_.data_dir) / "challenges.ndjson", std::ios::app);
    if (!out) throw IoError("cannot append to the challenge journal");
    out << record << '\n';
}

void ServerCore::register_device(const std::string& device_id, const tpm::AkPublic& ak,
                                 bool replace) {
    std::lock_guard lock(registry_mu_);
    if (registry_.contains(device_id) && !replace) throw DuplicateDevice(device_id);
    registry_[device_id] = {ak, utc_iso8601(clock_())};
    persist_registry_locked();
}

std::optional<tpm::AkPublic> ServerCore::lookup_device(const std::string& device_id) const {
    std::lock_guard lock(registry_mu_);
    auto it = registry_.find(device_id);
    if (it == registry_.end()) return std::nullopt;
    return it->second.first;
}

Challenge ServerCore::issue_challenge(const std::string& device_id) {
    if (!lookup_device(device_id)) throw UnknownDeviceError(device_id);
    auto nonce = crypto::random_bytes(32);
    Challenge ch;
    ch.nonce_hex = encoding::to_hex(nonce);
    int64_t now = clock_();
    ch.expires_at = now + config_.nonce_ttl_seconds;
    std::lock_guard lock(cache_mu_);
    challenges_[ch.nonce_hex] = {device_id, now, config_.nonce_ttl_seconds, false};
    append_challenge_journal_locked(json{{"op", "issue"},
                                         {"nonce", ch.nonce_hex},
                                         {"device_id", device_id},
                                         {"issued_at", now},
                                         {"ttl", config_.nonce_ttl_seconds}}
                                        .dump());
    return ch;
}

std::optional<FailureReason> ServerCore::check_nonce(const bundle::AttestationBundle& b) {
    std::string nonce_hex = encoding::to_hex(b.nonce);
    std::lock_guard lock(cache_mu_);
    if (config_.legacy_client_nonce) {
        int64_t stamp = 0;
        for (int i = 0; i < 8; ++i) stamp = (stamp << 8) | b.nonce[i];
        int64_t skew = clock_() - stamp;
        if (skew < -300 || skew > 300) return FailureReason::NonceExpiredOrReplayed;
        if (legacy_replay_.contains(nonce_hex)) return FailureReason::NonceExpiredOrReplayed;
        legacy_replay_.insert(nonce_hex);
        append_challenge_journal_locked(json{{"op", "legacy"}, {"nonce", nonce_hex}}.dump());
        return std::nullopt;
    }
    auto it = challenges_.find(nonce_hex);
    if (it == challenges_.end() || it->second.device_id != b.device_id)
        return FailureReason::NonceMismatch;
    if (it->second.consumed || clock_() > it->second.issued_at + it->second.ttl)
        return FailureReason::NonceExpiredOrReplayed;
    it->second.consumed = true;  // check-and-consume is one step under the lock
    append_challenge_journal_locked(json{{"op", "consume"}, {"nonce", nonce_hex}}.dump());
    return std::nullopt;
}

AttestationVerdict ServerCore::verify_bundle(const bundle::AttestationBundle& b) {
    AttestationVerdict verdict;
    auto fail = [&](FailureReason r) {
        verdict.failure_reason = r;
        return verdict;
    };

    // (1) Pinned AK lookup; the bundle-carried key is cross-checked, never trusted alone.
    auto pinned = lookup_device(b.device_id);
    if (!pinned) return fail(FailureReason::UnknownDevice);
    if (pinned->key != b.ak_public.key || pinned->algorithm != b.ak_public.algorithm)
        return fail(FailureReason::BadSignature);

    // (2) Quote signature under the pinned key; nonce binding against the bundle nonce.
    auto quote_verdict = tpm::verify_quote(*pinned, b.quote, b.nonce);
    if (!quote_verdict.accepted) {
        return fail(quote_verdict.reason == tpm::QuoteReject::NonceMismatch
                        ? FailureReason::NonceMismatch
                        : FailureReason::BadSignature);
    }

    // (3) Nonce freshness: issued for this device, unexpired, never used before.
    if (auto reason = check_nonce(b)) return fail(*reason);

    // (4) Digest consistency between the bundle field and the quoted value.
    if (b.pcr_value != b.quote.pcr_value) return fail(FailureReason::PcrDigestInconsistent);

    // (5) Chain recomputation over the raw log.
    auto lines = log::split_lines(b.raw_log);
    verdict.recomputed_pcr = log::chain_evaluate(lines).pcr;
    if (verdict.recomputed_pcr != b.quote.pcr_value) return fail(FailureReason::ChainMismatch);

    verdict.attested = true;
    return verdict;
}

std::string ServerCore::session_dir(const std::string& device_id,
                                    const std::string& session_id) const {
    return (fs::path(config_.data_dir) / path_component(device_id) / path_component(session_id))
        .string();
}

void ServerCore::write_sink_file(const std::string& device_id, const std::string& session_id,
                                 const std::vector<std::string>& lines) {
    std::lock_guard lock(io_mu_);
    fs::path final_path = fs::path(config_.sink_dir) /
                          (path_component(device_id) + "_" + path_component(session_id) + ".ndjson");
    std::string content;
    if (fs::exists(final_path)) content = read_text_file(final_path);
    for (const auto& line : lines) {
        content += line;
        content += '\n';
    }
    fs::path tmp = final_path;
    tmp += ".tmp";
    write_text_file(tmp, content);
    fs::rename(tmp, final_path);
}

void ServerCore::append_index(const SessionIndexEntry& entry) {
    std::lock_guard lock(io_mu_);
    index_.push_back(entry);
    std::ofstream out(fs::path(config_.data_dir) / "index.ndjson", std::ios::app);
    if (!out) throw IoError("cannot append to session index");
    out << index_entry_to_json(entry).dump() << '\n';
}

IngestResponse ServerCore::ingest(const bundle::AttestationBundle& b) {
    AttestationVerdict verdict = verify_bundle(b);

    SessionIndexEntry entry;
    entry.device_id = b.device_id;
    entry.session_id = b.session_id;
    entry.attested = verdict.attested;
    entry.received_at = utc_iso8601(clock_());

    IngestResponse response;
    response.attested = verdict.attested;

    fs::path dir = session_dir(b.device_id, b.session_id);
    fs::create_directories(dir);

    if (!verdict.attested) {
        entry.reason = std::string(failure_reason_text(*verdict.failure_reason));
        response.reason = entry.reason;
        // Only the minimal failure record leaves the verifier; the unverified
        // log never reaches the sink.
        std::string record = failure_record_json(entry);
        write_text_file(dir / "verdict.json", record);
        write_sink_file(b.device_id, b.session_id, {record});
        append_index(entry);
        return response;
    }

    auto parsed = events::parse_log(b.raw_log, b.device_id);
    auto alerts = rules::evaluate(config_.rule_set, parsed, b.device_id, b.session_id);
    entry.events = parsed.size();
    entry.alerts = alerts.size();
    response.events = parsed.size();
    response.alerts = alerts.size();

    std::vector<std::string> sink_lines;
    std::string events_ndjson;
    sink_lines.reserve(parsed.size() + alerts.size());
    for (const auto& ev : parsed) {
        std::string line = events::event_to_ndjson(ev);
        events_ndjson += line;
        events_ndjson += '\n';
        sink_lines.push_back(std::move(line));
    }
    for (const auto& alert : alerts) sink_lines.push_back(rules::alert_to_ndjson(alert));

    json verdict_json;
    verdict_json["device_id"] = b.device_id;
    verdict_json["session_id"] = b.session_id;
    verdict_json["attested"] = true;
    verdict_json["recomputed_pcr_hex"] = encoding::to_hex(verdict.recomputed_pcr);
    verdict_json["received_at"] = entry.received_at;
    verdict_json["events"] = entry.events;
    verdict_json["alerts"] = entry.alerts;

    write_text_file(dir / "bundle.json", bundle::bundle_to_json(b));
    write_text_file(dir / "events.ndjson", events_ndjson);
    write_text_file(dir / "verdict.json", verdict_json.dump(2));
    write_sink_file(b.device_id, b.session_id, sink_lines);
    append_index(entry);
    return response;
}

IngestResponse ServerCore::ingest_json(const std::string& body) {
    bundle::AttestationBundle b;
    try {
        b = bundle::bundle_from_json(body);
    } catch (const Error& e) {
        IngestResponse response;
        response.http_status = 400;
        response.reason = e.what();
        return response;
    }
    return ingest(b);
}

std::vector<SessionIndexEntry> ServerCore::sessions(const std::string& device_id_filter) const {
    std::lock_guard lock(io_mu_);
    if (device_id_filter.empty()) return index_;
    std::vector<SessionIndexEntry> out;
    for (const auto& e : index_)
        if (e.device_id == device_id_filter) out.push_back(e);
    return out;
}

}  // namespace peacock::server
