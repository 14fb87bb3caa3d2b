#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <set>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "meshbed/dynamics/harness.hpp"
#include "meshbed/runtime/live_runtime.hpp"
#include "meshbed/scenario/runner.hpp"

namespace meshbed::scenario {

namespace {

volatile std::sig_atomic_t g_interrupted = 0;

void on_signal(int) {
    g_interrupted = 1;
}

LiveConfig live_config_for(const ScenarioConfig& cfg) {
    LiveConfig lc;
    lc.seed = cfg.seed;
    lc.drop_policy =
        cfg.live_lockstep ? DropPolicy::BlockSender : DropPolicy::DropNewest;
    return lc;
}

NetworkAddress live_address(const ScenarioConfig& cfg, PeerId id) {
    return NetworkAddress::tcp("127.0.0.1",
                               static_cast<std::uint16_t>(cfg.base_port +
                                                          live_port_offset(id)));
}

// Waits for run completion: learning epochs done (when bounded), the wall
// deadline, or an interrupt.
void wait_for_completion(const ScenarioConfig& cfg, LiveRuntime& rt) {
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::milliseconds(cfg.duration_ms);
    dyn::HarnessPeerlet* harness = nullptr;
    const bool epos_bounded =
        cfg.service != ServiceChoice::Dias && cfg.epos.max_epochs > 0;
    const bool epos_only = cfg.service == ServiceChoice::Epos;
    try {
        harness = rt.peer(ids::kHarness).find_peerlet<dyn::HarnessPeerlet>();
    } catch (const std::exception&) {
    }
    while (std::chrono::steady_clock::now() < deadline && g_interrupted == 0) {
        if (epos_bounded && epos_only && harness != nullptr && harness->epos_finished()) {
            // small grace period so final logs drain through the gateway
            std::this_thread::sleep_for(std::chrono::milliseconds(300));
            return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
}

} // namespace

LiveRunResult run_live_in_process(const ScenarioConfig& cfg, const std::string& store_path) {
    LiveRunResult result;
    result.store = std::make_unique<mon::RecordStore>(store_path);

    LiveRuntime rt(live_config_for(cfg));
    Wiring w;
    w.address_of = [&cfg](PeerId id) { return live_address(cfg, id); };
    w.add_peer = [&rt, &cfg](PeerId id, PeerletFactory f) {
        rt.add_peer(id,
                    static_cast<std::uint16_t>(cfg.base_port + live_port_offset(id)),
                    std::move(f));
    };
    wire_scenario(cfg, *result.store, w);
    rt.start_all();
    wait_for_completion(cfg, rt);
    rt.stop_all();

    result.failed_sends = rt.failed_sends();
    result.rows = metrics_from_store(cfg, *result.store, /*live=*/true);
    return result;
}

int run_live_scenario(const ScenarioConfig& cfg) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    LiveRunResult result = run_live_in_process(cfg, cfg.out_dir + "/store.log");
    std::ofstream csv(cfg.out_dir + "/metrics.csv", std::ios::binary);
    csv << dyn::metrics_csv(result.rows);
    std::ofstream report(cfg.out_dir + "/report.txt", std::ios::binary);
    report << render_report(cfg, result.rows, *result.store);
    if (result.failed_sends > 0) {
        std::cerr << "note: " << result.failed_sends << " failed sends (see report)\n";
    }
    return 0;
}

int run_peer_worker(const ScenarioConfig& cfg, PeerId peer_id) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    mon::RecordStore store; // service agents log remotely; local store unused

    LiveRuntime rt(live_config_for(cfg));
    bool hosted = false;
    Wiring w;
    w.address_of = [&cfg](PeerId id) { return live_address(cfg, id); };
    w.add_peer = [&rt, &cfg, peer_id, &hosted](PeerId id, PeerletFactory f) {
        if (id != peer_id) {
            return;
        }
        hosted = true;
        rt.add_peer(id,
                    static_cast<std::uint16_t>(cfg.base_port + live_port_offset(id)),
                    std::move(f));
    };
    wire_scenario(cfg, store, w);
    if (!hosted) {
        std::cerr << "peer-worker: no peer with id " << peer_id << " in this scenario\n";
        return 2;
    }
    rt.start_all();
    const auto deadline =
        std::chrono::steady_clock::now() +
        std::chrono::milliseconds(cfg.duration_ms + 5000);
    while (std::chrono::steady_clock::now() < deadline && g_interrupted == 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    rt.stop_all();
    return 0;
}

int run_live_multiprocess(const ScenarioConfig& cfg, const std::string& exe_path) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    // Children host the service agents; the parent keeps the gateways,
    // logging, harness and the application agents.
    std::vector<PeerId> child_ids;
    const bool epos_on = cfg.service != ServiceChoice::Dias;
    const bool dias_on = cfg.service != ServiceChoice::Epos;
    if (epos_on) {
        for (std::uint32_t i = 0; i < cfg.epos.agents; ++i) {
            child_ids.push_back(ids::kEposAgentBase + i);
        }
    }
    if (dias_on) {
        for (std::uint32_t i = 0; i < cfg.dias.agents; ++i) {
            child_ids.push_back(ids::kDiasAgentBase + i);
        }
    }

    const std::string config_path = cfg.out_dir + "/config.txt";
    std::vector<pid_t> children;
    for (const PeerId id : child_ids) {
        const pid_t pid = ::fork();
        if (pid < 0) {
            std::cerr << "fork failed\n";
            for (const pid_t p : children) {
                ::kill(p, SIGTERM);
            }
            return 3;
        }
        if (pid == 0) {
            const std::string id_str = std::to_string(id);
            ::execl(exe_path.c_str(), exe_path.c_str(), "peer-worker", "--config",
                    config_path.c_str(), "--peer", id_str.c_str(), nullptr);
            std::cerr << "execl failed for peer-worker\n";
            ::_exit(127);
        }
        children.push_back(pid);
    }

    auto store = std::make_unique<mon::RecordStore>(cfg.out_dir + "/store.log");
    LiveRuntime rt(live_config_for(cfg));
    Wiring w;
    w.address_of = [&cfg](PeerId id) { return live_address(cfg, id); };
    std::set<PeerId> remote(child_ids.begin(), child_ids.end());
    w.add_peer = [&rt, &cfg, &remote](PeerId id, PeerletFactory f) {
        if (remote.count(id) != 0) {
            return; // hosted by a child process
        }
        rt.add_peer(id,
                    static_cast<std::uint16_t>(cfg.base_port + live_port_offset(id)),
                    std::move(f));
    };
    wire_scenario(cfg, *store, w);
    // Give the children a moment to bind their listeners.
    std::this_thread::sleep_for(std::chrono::milliseconds(500));
    rt.start_all();
    wait_for_completion(cfg, rt);
    rt.stop_all();

    int crashed = 0;
    for (const pid_t pid : children) {
        ::kill(pid, SIGTERM);
    }
    for (const pid_t pid : children) {
        int status = 0;
        ::waitpid(pid, &status, 0);
        const bool clean_exit = WIFEXITED(status) && WEXITSTATUS(status) == 0;
        const bool terminated = WIFSIGNALED(status) && WTERMSIG(status) == SIGTERM;
        if (!clean_exit && !terminated) {
            ++crashed;
        }
    }

    const auto rows = metrics_from_store(cfg, *store, /*live=*/true);
    std::ofstream csv(cfg.out_dir + "/metrics.csv", std::ios::binary);
    csv << dyn::metrics_csv(rows);
    std::ofstream report(cfg.out_dir + "/report.txt", std::ios::binary);
    report << render_report(cfg, rows, *store);
    if (crashed > 0) {
        std::ofstream marker(cfg.out_dir + "/abort.marker", std::ios::binary);
        marker << crashed << " service agent processes crashed\n";
        std::cerr << crashed << " service agent processes crashed\n";
        return 3;
    }
    return 0;
}

} // namespace meshbed::scenario
