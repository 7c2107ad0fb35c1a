#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "peacock/bundle.hpp"
#include "peacock/event_parser.hpp"
#include "peacock/rules.hpp"

namespace peacock::server {

struct ServerConfig {
    std::string data_dir = "peacock-data";
    std::string sink_dir = "peacock-sink";
    int64_t nonce_ttl_seconds = 120;
    // Accepts client-generated nonces (8-byte big-endian unix seconds plus 24
    // random bytes) with a replay cache and a +/-300s skew window. Weaker than
    // challenge-response; off by default.
    bool legacy_client_nonce = false;
    std::vector<rules::DetectionRule> rule_set = rules::builtin_rules();
};

enum class FailureReason {
    UnknownDevice,
    BadSignature,
    NonceMismatch,
    NonceExpiredOrReplayed,
    PcrDigestInconsistent,
    ChainMismatch,
};

std::string_view failure_reason_text(FailureReason r);

struct AttestationVerdict {
    bool attested = false;
    std::optional<FailureReason> failure_reason;
    crypto::Digest32 recomputed_pcr{};
};

struct Challenge {
    std::string nonce_hex;
    int64_t expires_at = 0;  // unix seconds
};

struct SessionIndexEntry {
    std::string device_id;
    std::string session_id;
    bool attested = false;
    std::string reason;  // empty when attested
    std::string received_at;
    std::size_t events = 0;
    std::size_t alerts = 0;
};

struct IngestResponse {
    int http_status = 200;
    bool attested = false;
    std::string reason;
    std::size_t events = 0;
    std::size_t alerts = 0;
    std::string to_json() const;
};

// Verification, parsing, detection, persistence, and sink forwarding. The
// HTTP layer is a thin shell over this class; the CLI can embed it directly.
//
// Layout under data_dir: devices.json, challenges.json, index.ndjson, and
// <device>/<session>/{bundle.json, events.ndjson, verdict.json}. The sink dir
// receives one NDJSON file per session, written via temp-file-then-rename.
class ServerCore {
  public:
    using Clock = std::function<int64_t()>;  // unix seconds

    explicit ServerCore(ServerConfig config, Clock clock = {});

    void register_device(const std::string& device_id, const tpm::AkPublic& ak, bool replace);
    std::optional<tpm::AkPublic> lookup_device(const std::string& device_id) const;

    Challenge issue_challenge(const std::string& device_id);  // throws UnknownDeviceError

    // The five ordered checks: pinned-AK match, quote signature, nonce
    // freshness (consuming it), digest consistency, chain recomputation.
    AttestationVerdict verify_bundle(const bundle::AttestationBundle& b);

    IngestResponse ingest(const bundle::AttestationBundle& b);
    IngestResponse ingest_json(const std::string& body);  // 400 on malformed JSON

    std::vector<SessionIndexEntry> sessions(const std::string& device_id_filter = {}) const;

    const ServerConfig& config() const { return config_; }
    int64_t now() const { return clock_(); }

  private:
    struct ChallengeRecord {
        std::string device_id;
        int64_t issued_at = 0;
        int64_t ttl = 0;
        bool consumed = false;
    };

    std::optional<FailureReason> check_nonce(const bundle::AttestationBundle& b);
    void persist_registry_locked();
    void append_challenge_journal_locked(const std::string& record);
    void load_state();
    void append_index(const SessionIndexEntry& entry);
    void write_sink_file(const std::string& device_id, const std::string& session_id,
                         const std::vector<std::string>& lines);
    std::string session_dir(const std::string& device_id, const std::string& session_id) const;

    ServerConfig config_;
    Clock clock_;

    mutable std::mutex registry_mu_;
    std::map<std::string, std::pair<tpm::AkPublic, std::string>> registry_;  // id -> (ak, enrolled_at)

    mutable std::mutex cache_mu_;
    std::map<std::string, ChallengeRecord> challenges_;  // nonce_hex -> record
    std::set<std::string> legacy_replay_;

    mutable std::mutex io_mu_;
    std::vector<SessionIndexEntry> index_;
};

std::string failure_record_json(const SessionIndexEntry& entry);

}  // namespace peacock::server
