#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "meshbed/dynamics/metrics.hpp"
#include "meshbed/monitor/store.hpp"
#include "meshbed/runtime/sim_runtime.hpp"
#include "meshbed/scenario/config.hpp"

namespace meshbed::scenario {

// Well-known peer ids, identical in SIM and LIVE so logs line up.
namespace ids {
inline constexpr PeerId kEposGateway = 1;
inline constexpr PeerId kDiasGateway = 2;
inline constexpr PeerId kLogGateway = 3;
inline constexpr PeerId kHarness = 4;
inline constexpr PeerId kEposDeviceBase = 100;
inline constexpr PeerId kDiasDeviceBase = 500;
inline constexpr PeerId kEposAgentBase = 1000;
inline constexpr PeerId kDiasAgentBase = 2000;
} // namespace ids

// Deterministic LIVE port layout: base_port + offset(peer id).
std::uint16_t live_port_offset(PeerId id);

// Runtime-agnostic scenario wiring: the runtime supplies addressing and
// peer construction, the wiring decides who exists and what they run.
struct Wiring {
    std::function<NetworkAddress(PeerId)> address_of;
    std::function<void(PeerId, PeerletFactory)> add_peer;
};

void wire_scenario(const ScenarioConfig& cfg, mon::RecordStore& store, const Wiring& w);

// Steering vector used by MIN_RMSE runs: zero day-time target, constant
// night target (from file when configured).
std::vector<double> build_steering(const ScenarioConfig& cfg);

struct SimScenario {
    ScenarioConfig cfg;
    std::unique_ptr<mon::RecordStore> store;
    std::unique_ptr<SimRuntime> rt;
};

SimScenario build_sim_scenario(const ScenarioConfig& cfg, const std::string& store_path = {},
                               const std::function<void(SimConfig&)>& tune = {});

// start_all + run_until(cfg.duration_ms).
void run_sim_scenario(SimScenario& s);

// Store -> metrics rows (learning-run costs, latency/WAT, aggregation error
// series). `live` routes global/local costs into the g_l/l_l columns.
std::vector<dyn::MetricsRecord> metrics_from_store(const ScenarioConfig& cfg,
                                                   const mon::RecordStore& store,
                                                   bool live);

// Eq-2 style merge of a sim and a live metrics table; throws on shape
// mismatch.
std::vector<dyn::MetricsRecord> compare_runs(const std::vector<dyn::MetricsRecord>& sim_rows,
                                             const std::vector<dyn::MetricsRecord>& live_rows);

std::string render_report(const ScenarioConfig& cfg,
                          const std::vector<dyn::MetricsRecord>& rows,
                          const mon::RecordStore& store);

// LIVE in-process run: every peer on its own executor thread, TCP
// transport on localhost. Blocks until the learning runs complete (when
// max_epochs is set) or the wall-clock duration elapses.
struct LiveRunResult {
    std::vector<dyn::MetricsRecord> rows;
    std::unique_ptr<mon::RecordStore> store;
    std::uint64_t failed_sends = 0;
};
LiveRunResult run_live_in_process(const ScenarioConfig& cfg,
                                  const std::string& store_path = {});

// LIVE via the CLI: artifacts under cfg.out_dir; with cfg.live_processes the
// service agents run as separate localhost processes spawned from exe_path.
int run_live_scenario(const ScenarioConfig& cfg);
int run_live_multiprocess(const ScenarioConfig& cfg, const std::string& exe_path);

// Child-process entry for one hosted service agent.
int run_peer_worker(const ScenarioConfig& cfg, PeerId peer_id);

// Config checks that need the filesystem (referenced files exist).
std::vector<std::string> preflight(const ScenarioConfig& cfg);

// Full CLI entry: build, run, emit artifacts under cfg.out_dir.
// Exit codes: 0 ok, 2 config error, 3 runtime abort.
int run_scenario(const ScenarioConfig& cfg);

} // namespace meshbed::scenario
