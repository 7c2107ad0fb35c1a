#include <doctest.h>

#include <map>

#include "helpers.hpp"
#include "peacock/errors.hpp"
#include "peacock/runner.hpp"
#include "peacock/scenario.hpp"
#include "peacock/sim.hpp"

using namespace peacock;
using namespace peacock::sim;

namespace {
SimEnvironment fresh_env() {
    return build_environment({"TianoCore EDK II", "2.10-sim.1", "2024-05-01"});
}
}  // namespace

TEST_CASE("service inventory matches the published per-category counts") {
    auto inv = service_inventory();
    std::map<ServiceCategory, int> counts;
    int boot = 0, runtime = 0;
    for (const auto& s : inv) {
        ++counts[s.category];
        (s.table == TableKind::Boot ? boot : runtime)++;
    }
    CHECK(boot == 45);
    CHECK(runtime == 20);
    CHECK(counts[ServiceCategory::EventTimerTpl] == 9);
    CHECK(counts[ServiceCategory::MemoryAllocation] == 5);
    CHECK(counts[ServiceCategory::ProtocolHandler] == 18);
    CHECK(counts[ServiceCategory::Image] == 6);
    CHECK(counts[ServiceCategory::MiscBoot] == 7);
    CHECK(counts[ServiceCategory::Variable] == 8);
    CHECK(counts[ServiceCategory::Time] == 4);
    CHECK(counts[ServiceCategory::VirtualMemory] == 2);
    CHECK(counts[ServiceCategory::MiscRuntime] == 6);
}

TEST_CASE("built environment exposes 45 + 20 slots with valid CRCs") {
    auto env = fresh_env();
    CHECK(env.boot_table.entries.size() == 45);
    CHECK(env.runtime_table.entries.size() == 20);
    CHECK(table_crc_valid(env.boot_table));
    CHECK(table_crc_valid(env.runtime_table));
    CHECK(env.tick == 0);
    for (const auto& [name, slot] : env.boot_table.entries)
        CHECK(slot.current_target == slot.original_target);
}

TEST_CASE("table CRC is deterministic and target-sensitive") {
    auto a = fresh_env();
    auto b = fresh_env();
    CHECK(compute_table_crc32(a.boot_table) == compute_table_crc32(b.boot_table));

    a.loaded_images.push_back({"\\EFI\\x.efi", Origin::Esp, 0x1000, 0x2000});
    apply_external_hook(a, "LoadImage", "\\EFI\\x.efi", false);
    CHECK(compute_table_crc32(a.boot_table) != compute_table_crc32(b.boot_table));
}

TEST_CASE("hook with recompute masks the CRC, without it the CRC fails") {
    auto env = fresh_env();
    env.loaded_images.push_back({"\\EFI\\Boot\\EfiGuardDxe.efi", Origin::Esp, 0x7F62B000, 0x7F67D000});

    SUBCASE("recompute_crc=true keeps the table self-validating") {
        auto before = env.boot_table.find("LoadImage")->current_target;
        apply_external_hook(env, "LoadImage", "\\EFI\\Boot\\EfiGuardDxe.efi", true);
        CHECK(table_crc_valid(env.boot_table));
        CHECK(env.boot_table.find("LoadImage")->current_target != before);
    }
    SUBCASE("recompute_crc=false leaves a stale checksum") {
        apply_external_hook(env, "LoadImage", "\\EFI\\Boot\\EfiGuardDxe.efi", false);
        CHECK_FALSE(table_crc_valid(env.boot_table));
        CHECK(env.boot_table.header_crc32 != compute_table_crc32(env.boot_table));
    }
}

TEST_CASE("hook then unhook restores the table bitwise") {
    auto env = fresh_env();
    env.loaded_images.push_back({"\\EFI\\Boot\\x.efi", Origin::Esp, 0x1000, 0x2000});
    ServiceTable before = env.boot_table;
    apply_external_hook(env, "LoadImage", "\\EFI\\Boot\\x.efi", true);
    CHECK(env.boot_table != before);
    remove_external_hook(env, "LoadImage", true);
    CHECK(env.boot_table == before);
}

TEST_CASE("unknown service raises") {
    auto env = fresh_env();
    env.loaded_images.push_back({"\\EFI\\x.efi", Origin::Esp, 0x1000, 0x2000});
    CHECK_THROWS_AS(apply_external_hook(env, "NoSuchService", "\\EFI\\x.efi", true),
                    UnknownService);
    CHECK_THROWS_AS(invoke_service(env, nullptr, nullptr, "NoSuchService", {}), UnknownService);
}

TEST_CASE("routing dispatches through the hook chain") {
    auto env = fresh_env();
    env.loaded_images.push_back({"\\EFI\\hooker.efi", Origin::Esp, 0x1000, 0x2000});
    apply_external_hook(env, "GetVariable", "\\EFI\\hooker.efi", true);
    // A hooked service still reaches the built-in behavior through the chain.
    env.nvram[{"Marker", "8BE4DF61-93CA-11D2-AA0D-00E098032B8C"}] = "7A";
    auto out = invoke_service(env, nullptr, nullptr, "GetVariable",
                              {{"VariableName", "Marker"},
                               {"VendorGuid", "8BE4DF61-93CA-11D2-AA0D-00E098032B8C"}});
    CHECK(out.status == "Success");
    REQUIRE(out.outs.size() == 2);
    CHECK(out.outs[1].value == "7A");
    // restoring the original removes the hook from the path
    remove_external_hook(env, "GetVariable", true);
    const auto* slot = env.runtime_table.find("GetVariable");
    REQUIRE(slot != nullptr);
    CHECK(env.handler(slot->current_target).kind == Handler::Kind::PassThrough);
}

TEST_CASE("scenario actions execute in order with strictly increasing ticks") {
    auto scenario = load_builtin_scenario("baseline");
    auto run = test_helpers::run_boot(scenario);
    REQUIRE(run.result.transcript.size() > 2);
    for (std::size_t i = 1; i < run.result.transcript.size(); ++i)
        CHECK(run.result.transcript[i].t > run.result.transcript[i - 1].t);
}

TEST_CASE("baseline transcript pairs every Enter with an Exit") {
    auto run = test_helpers::run_builtin("baseline");
    std::map<uint64_t, int> balance;
    for (const auto& e : run.result.transcript) {
        if (std::holds_alternative<log::EnterBody>(e.body)) balance[e.cid]++;
        if (std::holds_alternative<log::ExitBody>(e.body)) balance[e.cid]--;
    }
    for (const auto& [cid, b] : balance) {
        CAPTURE(cid);
        CHECK(b == 0);
    }
}

TEST_CASE("identical scenario, config, and seed give byte-identical transcripts") {
    auto a = test_helpers::run_builtin("glupteba", {}, "dev", 1234);
    auto b = test_helpers::run_builtin("glupteba", {}, "dev", 1234);
    CHECK(a.raw_log == b.raw_log);
    auto c = test_helpers::run_builtin("glupteba", {}, "dev", 1235);
    CHECK(c.raw_log != a.raw_log);  // session id differs with the seed
}

TEST_CASE("undeclared actor is a reference error") {
    auto scenario = load_builtin_scenario("baseline");
    scenario.actions[0].actor = "\\EFI\\ghost.efi";
    CHECK_THROWS_AS(test_helpers::run_boot(scenario), ScenarioReferenceError);
}

TEST_CASE("declared but never-loaded actor is a reference error") {
    auto scenario = load_builtin_scenario("baseline");
    // bootloader acts before anything loads it
    std::swap(scenario.actions[0], scenario.actions.back());
    CHECK_THROWS_AS(test_helpers::run_boot(scenario), ScenarioReferenceError);
}

TEST_CASE("scenario JSON round-trips") {
    auto scenario = load_builtin_scenario("blacklotus");
    auto text = scenario_to_json(scenario);
    auto back = scenario_from_json(text);
    CHECK(back.name == scenario.name);
    CHECK(back.images == scenario.images);
    CHECK(back.actions.size() == scenario.actions.size());
    CHECK(scenario_to_json(back) == text);
}

TEST_CASE("modeled services reject unknown argument names") {
    auto env = fresh_env();
    CHECK_THROWS_AS(
        invoke_service(env, nullptr, nullptr, "LocateProtocol", {{"Bogus", "1"}}),
        ScenarioFormatError);
}

TEST_CASE("glupteba scenario under fail-secure halts early") {
    auto scenario = load_builtin_scenario("glupteba");
    agent::AgentConfig open_cfg;
    open_cfg.policy = agent::Policy::FailOpen;
    agent::AgentConfig secure_cfg;
    secure_cfg.policy = agent::Policy::FailSecure;

    auto open_run = test_helpers::run_boot(scenario, open_cfg);
    auto secure_run = test_helpers::run_boot(scenario, secure_cfg);

    CHECK_FALSE(open_run.result.halted);
    CHECK(secure_run.result.halted);
    CHECK(secure_run.result.transcript.size() < open_run.result.transcript.size());
    CHECK(std::holds_alternative<log::HaltBody>(secure_run.result.transcript.back().body));
    // fewer service invocations completed under fail-secure
    CHECK(secure_run.result.outcomes.size() < open_run.result.outcomes.size());
}
