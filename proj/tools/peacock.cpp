#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "peacock/agent.hpp"
#include "peacock/bundle.hpp"
#include "peacock/encoding.hpp"
#include "peacock/errors.hpp"
#include "peacock/event_parser.hpp"
#include "peacock/http_server.hpp"
#include "peacock/os_agent.hpp"
#include "peacock/rules.hpp"
#include "peacock/runner.hpp"
#include "peacock/scenario.hpp"
#include "peacock/soft_tpm.hpp"
#include "peacock/verifier.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace peacock;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAttestationFailed = 2;
constexpr int kExitDetectionThreshold = 3;
constexpr int kExitUsage = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& content) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << content;
}

sim::Scenario load_scenario_arg(const std::string& arg) {
    for (const auto& name : sim::builtin_scenario_names())
        if (name == arg) return sim::load_builtin_scenario(name);
    return sim::scenario_from_json(read_file(arg));
}

std::vector<rules::DetectionRule> load_rules_arg(const std::string& rules_dir) {
    if (rules_dir.empty()) return rules::builtin_rules();
    return rules::load_rules_dir(rules_dir);
}

agent::Policy policy_from_text(const std::string& text) {
    if (text == "fail-secure") return agent::Policy::FailSecure;
    if (text == "fail-open") return agent::Policy::FailOpen;
    throw Error("--policy must be fail-secure or fail-open");
}

crypto::Digest32 nonce_from_hex(const std::string& hex) {
    auto bytes = encoding::from_hex(hex);
    if (bytes.size() != 32) throw Error("nonce must be 32 bytes of hex");
    crypto::Digest32 out;
    std::copy(bytes.begin(), bytes.end(), out.begin());
    return out;
}

crypto::Digest32 make_legacy_nonce() {
    auto rnd = crypto::random_bytes(24);
    int64_t now = std::chrono::duration_cast<std::chrono::seconds>(
                      std::chrono::system_clock::now().time_since_epoch())
                      .count();
    crypto::Digest32 nonce{};
    for (int i = 0; i < 8; ++i) nonce[i] = static_cast<uint8_t>(now >> (8 * (7 - i)));
    std::copy(rnd.begin(), rnd.end(), nonce.begin() + 8);
    return nonce;
}

// Remote helpers ------------------------------------------------------------

void remote_enroll(const std::string& server, const std::string& device_id,
                   const tpm::AkPublic& ak, bool replace) {
    httplib::Client client(server);
    json body;
    body["device_id"] = device_id;
    body["ak_public"] = json::parse(bundle::ak_public_to_json(ak));
    if (replace) body["replace"] = true;
    auto res = client.Post("/api/v1/devices", body.dump(), "application/json");
    if (!res) throw TransportError("cannot reach " + server);
    if (res->status == 409) throw DuplicateDevice(device_id);
    if (res->status != 201) throw Error("enroll failed: HTTP " + std::to_string(res->status) +
                                        " " + res->body);
}

server::Challenge remote_challenge(const std::string& server, const std::string& device_id) {
    httplib::Client client(server);
    auto res = client.Get("/api/v1/challenge?device_id=" + device_id);
    if (!res) throw TransportError("cannot reach " + server);
    if (res->status == 404) throw UnknownDeviceError(device_id);
    if (res->status != 200) throw Error("challenge failed: HTTP " + std::to_string(res->status));
    json j = json::parse(res->body);
    return {j.at("nonce_hex").get<std::string>(), j.at("expires_at").get<int64_t>()};
}

// run -----------------------------------------------------------------------

struct RunOptions {
    std::string scenario;
    std::string policy = "fail-open";
    std::string server_url;
    std::string data_dir = "peacock-data";
    std::string sink_dir = "peacock-sink";
    std::string rules_dir;
    std::string fail_on;
    std::string device_id = "desk-01";
    std::string agent_config_path;
    std::string out_dir;
    uint64_t seed = 42;
    bool legacy_nonce = false;
};

int cmd_run(const RunOptions& opt) {
    sim::Scenario scenario = load_scenario_arg(opt.scenario);

    agent::AgentConfig config;
    if (!opt.agent_config_path.empty())
        config = agent::agent_config_from_json(read_file(opt.agent_config_path));
    config.policy = policy_from_text(opt.policy);

    tpm::SoftTpm device_tpm(opt.device_id, opt.seed);

    sim::SimEnvironment env = sim::build_environment(scenario.firmware_meta);
    env.tick = scenario.tick_start;
    env.tick_stride = scenario.tick_stride;

    agent::Agent boot_agent(device_tpm, config, opt.seed);
    boot_agent.install_hooks(env);
    sim::RunResult run = sim::run_scenario(env, scenario, &boot_agent);
    boot_agent.finalize_and_export(env);

    auto collected = osagent::collect(env);

    // Enroll on first contact, then challenge-response (or legacy self-nonce).
    crypto::Digest32 nonce;
    std::optional<server::ServerCore> local;
    if (opt.server_url.empty()) {
        server::ServerConfig scfg;
        scfg.data_dir = opt.data_dir;
        scfg.sink_dir = opt.sink_dir;
        scfg.legacy_client_nonce = opt.legacy_nonce;
        scfg.rule_set = load_rules_arg(opt.rules_dir);
        local.emplace(std::move(scfg));
        if (!local->lookup_device(opt.device_id))
            local->register_device(opt.device_id, device_tpm.ak_public(), false);
        nonce = opt.legacy_nonce ? make_legacy_nonce()
                                 : nonce_from_hex(local->issue_challenge(opt.device_id).nonce_hex);
    } else {
        if (opt.legacy_nonce) {
            try {
                remote_enroll(opt.server_url, opt.device_id, device_tpm.ak_public(), false);
            } catch (const DuplicateDevice&) {
            }
            nonce = make_legacy_nonce();
        } else {
            try {
                nonce = nonce_from_hex(remote_challenge(opt.server_url, opt.device_id).nonce_hex);
            } catch (const UnknownDeviceError&) {
                remote_enroll(opt.server_url, opt.device_id, device_tpm.ak_public(), false);
                nonce = nonce_from_hex(remote_challenge(opt.server_url, opt.device_id).nonce_hex);
            }
        }
    }

    auto b = osagent::build_bundle(collected.raw_log, device_tpm, nonce, opt.device_id,
                                   config.pcr_index);

    bool attested = false;
    std::string reason;
    std::size_t event_count = 0, alert_count = 0;
    if (local) {
        auto response = local->ingest(b);
        attested = response.attested;
        reason = response.reason;
        event_count = response.events;
        alert_count = response.alerts;
    } else {
        auto receipt = osagent::submit(b, opt.server_url);
        attested = receipt.attested;
        reason = receipt.reason;
        try {
            json j = json::parse(receipt.body);
            event_count = j.value("events", std::size_t{0});
            alert_count = j.value("alerts", std::size_t{0});
        } catch (const json::exception&) {
        }
    }

    // Severity gate: evaluated locally with the same corpus the server runs.
    std::vector<rules::Alert> alerts;
    if (attested) {
        auto parsed = events::parse_log(collected.raw_log, opt.device_id);
        alerts = rules::evaluate(load_rules_arg(opt.rules_dir), parsed, opt.device_id,
                                 collected.session_id);
    }

    std::string out_dir = opt.out_dir.empty() ? "runs/" + scenario.name : opt.out_dir;
    fs::create_directories(out_dir);
    std::string log_path = out_dir + "/boot.log";
    std::string tpm_path = out_dir + "/tpm-state.json";
    std::string bundle_path = out_dir + "/bundle.json";
    std::string report_path = out_dir + "/report.json";
    write_file(log_path, collected.raw_log);
    write_file(tpm_path, device_tpm.state_to_json());
    write_file(bundle_path, bundle::bundle_to_json(b));

    int exit_code = kExitOk;
    if (!attested) exit_code = kExitAttestationFailed;
    if (exit_code == kExitOk && !opt.fail_on.empty()) {
        rules::Severity threshold = rules::severity_from_text(opt.fail_on);
        for (const auto& a : alerts)
            if (rules::severity_at_least(a.severity, threshold)) exit_code = kExitDetectionThreshold;
    }

    json report;
    report["scenario"] = scenario.name;
    report["session_id"] = collected.session_id;
    report["device_id"] = opt.device_id;
    report["verdict"] = attested ? "attested" : "attestation_failed";
    if (!attested) report["reason"] = reason;
    report["halted"] = run.halted;
    report["events"] = event_count;
    report["alerts"] = alert_count;
    json summary = json::array();
    for (const auto& a : alerts)
        summary.push_back({{"rule", a.rule},
                           {"severity", std::string(rules::severity_text(a.severity))},
                           {"groups", a.groups.size()}});
    report["alerts_summary"] = std::move(summary);
    report["artifacts"] = {{"log", log_path},
                           {"tpm_state", tpm_path},
                           {"bundle", bundle_path},
                           {"report", report_path}};
    report["exit_code"] = exit_code;
    write_file(report_path, report.dump(2));
    std::cout << report.dump(2) << "\n";
    return exit_code;
}

// serve ----------------------------------------------------------------------

server::HttpServer* g_running_server = nullptr;

void handle_signal(int) {
    if (g_running_server) g_running_server->stop();
}

int cmd_serve(const std::string& bind, int port, server::ServerConfig scfg) {
    server::ServerCore core(std::move(scfg));
    server::HttpServer http(core);
    g_running_server = &http;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    std::cerr << "peacock server listening on " << bind << ":" << port << "\n";
    if (!http.serve_forever(bind, port)) {
        std::cerr << "error: cannot bind " << bind << ":" << port << "\n";
        return kExitError;
    }
    return kExitOk;
}

// tamper ----------------------------------------------------------------------

int cmd_tamper(const std::string& log_path, const std::string& mutation, std::size_t line_no,
               std::size_t byte_no, const std::string& out_path) {
    std::string text = read_file(log_path);
    auto lines = log::split_lines(text);
    if (line_no == 0 || line_no > lines.size())
        throw OutOfRange("line " + std::to_string(line_no) + " out of range (log has " +
                         std::to_string(lines.size()) + " lines)");
    std::size_t idx = line_no - 1;

    if (mutation == "flip") {
        if (byte_no >= lines[idx].size())
            throw OutOfRange("byte " + std::to_string(byte_no) + " out of range (line has " +
                             std::to_string(lines[idx].size()) + " bytes)");
        lines[idx][byte_no] = static_cast<char>(lines[idx][byte_no] ^ 0x01);
    } else if (mutation == "delete") {
        lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(idx));
    } else if (mutation == "swap") {
        if (idx + 1 >= lines.size()) throw OutOfRange("swap needs a following line");
        std::swap(lines[idx], lines[idx + 1]);
    } else if (mutation == "truncate") {
        lines.resize(idx + 1);
    } else {
        throw Error("unknown mutation: " + mutation);
    }

    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    write_file(out_path.empty() ? log_path : out_path, out);
    return kExitOk;
}

// attest ----------------------------------------------------------------------

struct AttestOptions {
    std::string log_path;
    std::string tpm_state_path;
    std::string nonce_hex;
    std::string server_url;
    std::string data_dir = "peacock-data";
    std::string sink_dir = "peacock-sink";
    std::string rules_dir;
    int pcr_index = 23;
    bool legacy_nonce = false;
};

int cmd_attest(const AttestOptions& opt) {
    std::string raw_log = read_file(opt.log_path);
    tpm::SoftTpm device_tpm = tpm::SoftTpm::state_from_json(read_file(opt.tpm_state_path));
    std::string device_id = device_tpm.device_id();

    std::optional<server::ServerCore> local;
    if (opt.server_url.empty()) {
        server::ServerConfig scfg;
        scfg.data_dir = opt.data_dir;
        scfg.sink_dir = opt.sink_dir;
        scfg.legacy_client_nonce = opt.legacy_nonce;
        scfg.rule_set = load_rules_arg(opt.rules_dir);
        local.emplace(std::move(scfg));
    }

    crypto::Digest32 nonce;
    if (!opt.nonce_hex.empty())
        nonce = nonce_from_hex(opt.nonce_hex);
    else if (opt.legacy_nonce)
        nonce = make_legacy_nonce();
    else if (local)
        nonce = nonce_from_hex(local->issue_challenge(device_id).nonce_hex);
    else
        nonce = nonce_from_hex(remote_challenge(opt.server_url, device_id).nonce_hex);

    auto b = osagent::build_bundle(raw_log, device_tpm, nonce, device_id, opt.pcr_index);

    bool attested = false;
    std::string body;
    if (local) {
        auto response = local->ingest(b);
        attested = response.attested;
        body = response.to_json();
    } else {
        auto receipt = osagent::submit(b, opt.server_url);
        attested = receipt.attested;
        body = receipt.body;
    }
    std::cout << body << "\n";
    return attested ? kExitOk : kExitAttestationFailed;
}

int cmd_parse(const std::string& log_path, const std::string& device_id) {
    std::string raw_log = read_file(log_path);
    auto lines = log::split_lines(raw_log);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        try {
            log::parse_entry(lines[i]);
        } catch (const MalformedLine& e) {
            std::cerr << "error: line " << (i + 1) << ": " << e.what() << "\n";
            return kExitError;
        }
    }
    for (const auto& ev : events::parse_log(raw_log, device_id))
        std::cout << events::event_to_ndjson(ev) << "\n";
    return kExitOk;
}

int cmd_detect(const std::string& events_path, const std::string& rules_dir,
               const std::string& device_id) {
    std::string text = read_file(events_path);
    auto lines = log::split_lines(text);
    std::vector<events::ParsedEvent> parsed;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        try {
            parsed.push_back(events::event_from_ndjson(lines[i]));
        } catch (const Error& e) {
            std::cerr << "error: line " << (i + 1) << ": " << e.what() << "\n";
            return kExitError;
        }
    }
    auto rule_set = load_rules_arg(rules_dir);
    std::string session_id = parsed.empty() ? "" : parsed.front().session_id;
    for (const auto& alert : rules::evaluate(rule_set, parsed, device_id, session_id))
        std::cout << rules::alert_to_ndjson(alert) << "\n";
    return kExitOk;
}

int cmd_enroll(const std::string& device_id, uint64_t seed, const std::string& server_url,
               const std::string& data_dir, bool replace) {
    tpm::SoftTpm device_tpm(device_id, seed);
    if (server_url.empty()) {
        server::ServerConfig scfg;
        scfg.data_dir = data_dir;
        scfg.sink_dir = data_dir + "-sink-unused";
        server::ServerCore core(std::move(scfg));
        core.register_device(device_id, device_tpm.ak_public(), replace);
    } else {
        remote_enroll(server_url, device_id, device_tpm.ak_public(), replace);
    }
    json j;
    j["registered"] = device_id;
    j["ak_public"] = json::parse(bundle::ak_public_to_json(device_tpm.ak_public()));
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_challenge(const std::string& device_id, const std::string& server_url,
                  const std::string& data_dir) {
    server::Challenge ch;
    if (server_url.empty()) {
        server::ServerConfig scfg;
        scfg.data_dir = data_dir;
        scfg.sink_dir = data_dir + "-sink-unused";
        server::ServerCore core(std::move(scfg));
        ch = core.issue_challenge(device_id);
    } else {
        ch = remote_challenge(server_url, device_id);
    }
    json j;
    j["nonce_hex"] = ch.nonce_hex;
    j["expires_at"] = ch.expires_at;
    std::cout << j.dump() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Peacock desk-scale firmware telemetry pipeline"};
    app.require_subcommand(1);

    // run
    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "Run a scenario end to end and attest it");
    run->add_option("--scenario", run_opt.scenario, "Builtin scenario name or JSON file")->required();
    run->add_option("--policy", run_opt.policy, "fail-secure|fail-open");
    run->add_option("--server", run_opt.server_url, "Verifier base URL (default: in-process)");
    run->add_option("--data-dir", run_opt.data_dir, "Server data dir (in-process mode)");
    run->add_option("--sink-dir", run_opt.sink_dir, "Detection sink dir (in-process mode)");
    run->add_option("--rules", run_opt.rules_dir, "Rules directory (replaces builtin corpus)");
    run->add_option("--fail-on", run_opt.fail_on, "Exit 3 when alerts reach this severity");
    run->add_option("--seed", run_opt.seed, "Deterministic seed");
    run->add_option("--device-id", run_opt.device_id, "Device identity");
    run->add_option("--agent-config", run_opt.agent_config_path, "Agent config JSON file");
    run->add_option("--out", run_opt.out_dir, "Artifact output dir (default runs/<scenario>)");
    run->add_flag("--legacy-client-nonce", run_opt.legacy_nonce, "Client-generated nonce mode");

    // serve
    std::string bind = "127.0.0.1";
    int port = 8440;
    server::ServerConfig scfg;
    std::string serve_rules;
    auto* serve = app.add_subcommand("serve", "Start the verifier server");
    serve->add_option("--bind", bind, "Bind address");
    serve->add_option("--port", port, "Port");
    serve->add_option("--data-dir", scfg.data_dir, "Data directory");
    serve->add_option("--sink-dir", scfg.sink_dir, "Sink directory");
    serve->add_option("--rules", serve_rules, "Rules directory (replaces builtin corpus)");
    serve->add_option("--nonce-ttl", scfg.nonce_ttl_seconds, "Challenge TTL in seconds");
    serve->add_flag("--legacy-client-nonce", scfg.legacy_client_nonce,
                    "Accept client-generated nonces (replay cache + skew window)");

    // enroll
    std::string device_id = "desk-01";
    uint64_t seed = 42;
    std::string server_url, data_dir = "peacock-data";
    bool replace = false;
    auto* enroll = app.add_subcommand("enroll", "Register a device AK with the verifier");
    enroll->add_option("--device-id", device_id)->required();
    enroll->add_option("--seed", seed, "TPM seed (determines the AK)");
    enroll->add_option("--server", server_url, "Verifier base URL (default: local data dir)");
    enroll->add_option("--data-dir", data_dir);
    enroll->add_flag("--replace", replace, "Replace an existing enrollment");

    // challenge
    auto* challenge = app.add_subcommand("challenge", "Request an attestation nonce");
    challenge->add_option("--device-id", device_id)->required();
    challenge->add_option("--server", server_url);
    challenge->add_option("--data-dir", data_dir);

    // attest
    AttestOptions attest_opt;
    auto* attest = app.add_subcommand("attest", "Build a bundle from a log and submit it");
    attest->add_option("--log", attest_opt.log_path, "Exported boot log")->required();
    attest->add_option("--tpm-state", attest_opt.tpm_state_path, "TPM state JSON from a run")
        ->required();
    attest->add_option("--nonce", attest_opt.nonce_hex, "Challenge nonce (hex); fetched if absent");
    attest->add_option("--server", attest_opt.server_url);
    attest->add_option("--data-dir", attest_opt.data_dir);
    attest->add_option("--sink-dir", attest_opt.sink_dir);
    attest->add_option("--rules", attest_opt.rules_dir);
    attest->add_option("--pcr-index", attest_opt.pcr_index);
    attest->add_flag("--legacy-client-nonce", attest_opt.legacy_nonce);

    // parse
    std::string log_path, parse_device = "offline";
    auto* parse = app.add_subcommand("parse", "Parse a raw log into event NDJSON");
    parse->add_option("--log", log_path)->required();
    parse->add_option("--device-id", parse_device);

    // detect
    std::string events_path, rules_dir, detect_device = "offline";
    auto* detect = app.add_subcommand("detect", "Evaluate rules over an events NDJSON file");
    detect->add_option("--events", events_path)->required();
    detect->add_option("--rules", rules_dir, "Rules directory (replaces builtin corpus)");
    detect->add_option("--device-id", detect_device);

    // tamper
    std::string tamper_log, mutation, tamper_out;
    std::size_t line_no = 0, byte_no = 0;
    auto* tamper = app.add_subcommand("tamper", "Mutate a log for negative testing");
    tamper->add_option("--log", tamper_log)->required();
    tamper->add_option("--mutation", mutation, "flip|delete|swap|truncate")->required();
    tamper->add_option("--line", line_no, "1-based line number")->required();
    tamper->add_option("--byte", byte_no, "0-based byte within the line (flip)");
    tamper->add_option("--out", tamper_out, "Output path (default: in place)");

    // scenarios
    auto* scenarios = app.add_subcommand("scenarios", "List builtin scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(run_opt);
        if (serve->parsed()) {
            if (!serve_rules.empty()) scfg.rule_set = rules::load_rules_dir(serve_rules);
            return cmd_serve(bind, port, std::move(scfg));
        }
        if (enroll->parsed()) return cmd_enroll(device_id, seed, server_url, data_dir, replace);
        if (challenge->parsed()) return cmd_challenge(device_id, server_url, data_dir);
        if (attest->parsed()) return cmd_attest(attest_opt);
        if (parse->parsed()) return cmd_parse(log_path, parse_device);
        if (detect->parsed()) return cmd_detect(events_path, rules_dir, detect_device);
        if (tamper->parsed()) return cmd_tamper(tamper_log, mutation, line_no, byte_no, tamper_out);
        if (scenarios->parsed()) {
            for (const auto& name : sim::builtin_scenario_names()) std::cout << name << "\n";
            return kExitOk;
        }
    } catch (const OutOfRange& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitUsage;
}
