#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meshbed/core/ids.hpp"

namespace meshbed::scenario {

enum class ServiceChoice { Epos, Dias, Both };

// Flat-section key/value scenario description. `parse` reports every
// violation with its config line; `validate` re-checks a programmatically
// built config.
struct ScenarioConfig {
    ExecutionMode mode = ExecutionMode::Sim;
    ServiceChoice service = ServiceChoice::Epos;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    TimeMs duration_ms = 60000;
    std::uint16_t base_port = 9300;
    TimeMs delivery_delay_ms = 1;
    // LIVE: blocking queues and no stragglers (deterministic lockstep)
    // instead of the default best-effort DROP_NEWEST behavior.
    bool live_lockstep = false;
    // LIVE via the CLI: spawn one OS process per service agent.
    bool live_processes = false;

    struct Epos {
        std::uint32_t agents = 50;
        std::uint32_t plans_per_agent = 4;
        std::uint32_t dimension = 64;
        std::uint32_t iterations = 50;
        double alpha = 0.0;
        double beta = 0.0;
        std::string cost_function = "MIN_VAR";
        std::string steering_file;
        std::string plans_dir;
        bool normalize_terms = false;
        TimeMs straggler_timeout_ms = 0;
        std::uint64_t max_epochs = 0;
    } epos;

    struct Dias {
        std::uint32_t agents = 20;
        std::uint32_t view_size = 10;
        TimeMs gossip_period_ms = 100;
        TimeMs dissemination_period_ms = 200;
        std::uint32_t bloom_m = 2048;
        std::uint32_t bloom_h = 4;
        std::uint32_t k = 9;
        std::string states_mode = "stream"; // stream | clock | static
        TimeMs device_tick_ms = 625;
    } dias;

    struct Dynamics {
        bool inject = false;
        TimeMs period_length_ms = 60000;
        std::vector<std::string> cycle = {"LOW", "MEDIUM", "HIGH"};
        TimeMs change_stagger_ms = 1;
    } dynamics;

    struct Monitor {
        std::string auth_token = "testbed";
        std::uint32_t commit_batch = 256;
        TimeMs flush_period_ms = 50;
        TimeMs commit_period_ms = 20;
        TimeMs memory_period_ms = 0;
    } monitor;

    // Returns human-readable violations, empty when valid.
    std::vector<std::string> validate() const;

    static ScenarioConfig parse(const std::string& text, std::vector<std::string>& errors);
    static ScenarioConfig parse_file(const std::string& path,
                                     std::vector<std::string>& errors);

    std::string to_text() const; // round-trippable; also the --print-defaults body
};

} // namespace meshbed::scenario
