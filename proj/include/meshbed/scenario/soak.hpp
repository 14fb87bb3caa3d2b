#pragma once

#include <map>
#include <string>
#include <vector>

#include "meshbed/runtime/trace.hpp"
#include "meshbed/scenario/runner.hpp"

namespace meshbed::scenario {

// Per-pair bootstrap order conformance over a recorded delivery trace:
// broadcast < regDev < asgnAgn < ready < agnReady < runServ < data traffic
// (first occurrences), plus re-assignment after every rejoin registration.
// Returns one message per violation.
std::vector<std::string> check_bootstrap_order(const EventTrace& trace,
                                               const ScenarioConfig& cfg);

// Injectivity of the device->agent assignment at every point of the trace.
std::vector<std::string> check_assignment_injective(const EventTrace& trace);

struct SoakReport {
    std::uint64_t epochs_completed = 0;
    std::uint64_t epochs_aborted = 0;
    std::uint64_t parameter_changes = 0;
    std::uint64_t joins = 0;
    std::uint64_t leaves = 0;
    std::uint64_t messages_sent = 0;
    std::uint64_t messages_delivered = 0;
    std::uint64_t messages_dropped = 0;
    std::uint64_t session_regressions = 0;
    std::uint64_t crashes = 0;
    std::vector<std::string> violations;
    std::map<std::string, double> latency_mean_by_intensity;
    std::map<std::string, double> wat_mean_by_intensity;
    std::vector<dyn::MetricsRecord> rows;

    bool passed() const { return crashes == 0 && violations.empty(); }
    std::string text() const;
};

// Long-running SIM pressure run: dynamics injection on, protocol trace
// recorded, every cross-module invariant checked at the end.
SoakReport run_soak(const ScenarioConfig& cfg);

} // namespace meshbed::scenario
