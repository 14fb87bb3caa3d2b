#include "meshbed/scenario/runner.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "meshbed/bootstrap/app_agent.hpp"
#include "meshbed/bootstrap/gateway.hpp"
#include "meshbed/data/devices.hpp"
#include "meshbed/dias/agent.hpp"
#include "meshbed/dynamics/harness.hpp"
#include "meshbed/epos/agent.hpp"
#include "meshbed/monitor/gateway.hpp"
#include "meshbed/monitor/peerlet.hpp"

namespace meshbed::scenario {

std::uint16_t live_port_offset(PeerId id) {
    return static_cast<std::uint16_t>(id);
}

std::vector<double> build_steering(const ScenarioConfig& cfg) {
    const std::uint32_t d = cfg.epos.dimension;
    if (!cfg.epos.steering_file.empty()) {
        std::ifstream f(cfg.epos.steering_file, std::ios::binary);
        if (!f) {
            throw std::runtime_error("cannot open steering file: " + cfg.epos.steering_file);
        }
        std::vector<double> steering;
        std::string line;
        while (std::getline(f, line)) {
            const std::string t = trim(line);
            if (t.empty()) {
                continue;
            }
            const auto v = parse_double(t);
            if (!v) {
                throw std::runtime_error(cfg.epos.steering_file + ": bad value '" + t + "'");
            }
            steering.push_back(*v);
        }
        if (steering.size() != d) {
            throw std::runtime_error(cfg.epos.steering_file + ": expected " +
                                     std::to_string(d) + " values, got " +
                                     std::to_string(steering.size()));
        }
        return steering;
    }
    // Night-charging default: zero target across the "day" slots.
    std::vector<double> steering(d, 3.0 * cfg.epos.agents);
    const std::size_t day_start = d / 4;
    const std::size_t day_end = (11 * static_cast<std::size_t>(d)) / 12;
    for (std::size_t i = day_start; i < day_end; ++i) {
        steering[i] = 0.0;
    }
    return steering;
}

void wire_scenario(const ScenarioConfig& cfg, mon::RecordStore& store, const Wiring& w) {
    const bool epos_on = cfg.service != ServiceChoice::Dias;
    const bool dias_on = cfg.service != ServiceChoice::Epos;
    const bool live = cfg.mode == ExecutionMode::Live;

    const auto monitor_for = [&](std::vector<std::string> schema = {}) {
        mon::MonitorPeerlet::Config mc;
        mc.gateway = w.address_of(ids::kLogGateway);
        mc.auth_token = cfg.monitor.auth_token;
        mc.flush_period_ms = cfg.monitor.flush_period_ms;
        mc.memory_period_ms = cfg.monitor.memory_period_ms;
        if (mc.memory_period_ms > 0) {
            mc.memory_probe = &mon::MonitorPeerlet::rss_bytes;
        }
        mc.schema_keys = std::move(schema);
        return mc;
    };

    // Logging gateway.
    w.add_peer(ids::kLogGateway, [&cfg, &store] {
        PeerletList l;
        mon::LogGatewayPeerlet::Config gc;
        gc.auth_tokens = {cfg.monitor.auth_token};
        gc.commit_batch = cfg.monitor.commit_batch;
        gc.commit_period_ms = cfg.monitor.commit_period_ms;
        l.push_back(std::make_unique<mon::LogGatewayPeerlet>(gc, store));
        return l;
    });

    // Service gateways.
    if (epos_on) {
        boot::GatewayPeerlet::Config gw;
        gw.serv_info = "epos";
        gw.operator_addr = w.address_of(ids::kHarness);
        gw.ready_timeout_ms = live ? 10000 : 1000;
        for (std::uint32_t i = 0; i < cfg.epos.agents; ++i) {
            gw.app_agents.push_back(w.address_of(ids::kEposDeviceBase + i));
            gw.agent_pool.push_back(w.address_of(ids::kEposAgentBase + i));
        }
        w.add_peer(ids::kEposGateway, [gw, monitor_for] {
            PeerletList l;
            l.push_back(std::make_unique<boot::GatewayPeerlet>(gw));
            l.push_back(std::make_unique<mon::MonitorPeerlet>(monitor_for()));
            return l;
        });
    }
    if (dias_on) {
        boot::GatewayPeerlet::Config gw;
        gw.serv_info = "dias";
        gw.operator_addr = w.address_of(ids::kHarness);
        gw.ready_timeout_ms = live ? 10000 : 1000;
        for (std::uint32_t i = 0; i < cfg.dias.agents; ++i) {
            gw.app_agents.push_back(w.address_of(ids::kDiasDeviceBase + i));
            gw.agent_pool.push_back(w.address_of(ids::kDiasAgentBase + i));
        }
        w.add_peer(ids::kDiasGateway, [gw, monitor_for] {
            PeerletList l;
            l.push_back(std::make_unique<boot::GatewayPeerlet>(gw));
            l.push_back(std::make_unique<mon::MonitorPeerlet>(monitor_for()));
            return l;
        });
    }

    // Harness / operator.
    {
        dyn::HarnessPeerlet::Config hc;
        hc.seed = cfg.seed;
        hc.inject_changes = cfg.dynamics.inject;
        hc.change_stagger_ms = std::max<TimeMs>(1, cfg.dynamics.change_stagger_ms);
        hc.schedule.period_length_ms = cfg.dynamics.period_length_ms;
        for (const auto& name : cfg.dynamics.cycle) {
            hc.schedule.cycle.push_back(*dyn::intensity_from_name(name));
        }
        hc.initial_delay_ms = live ? 500 : 10;
        hc.retry_delay_ms = live ? 1000 : 100;
        hc.epos_enabled = epos_on;
        hc.dias_enabled = dias_on;
        if (epos_on) {
            hc.epos_gateway = w.address_of(ids::kEposGateway);
            hc.initial_gcf = cfg.epos.cost_function;
            hc.epos_iterations = cfg.epos.iterations;
            hc.max_epochs = cfg.epos.max_epochs;
            for (std::uint32_t i = 0; i < cfg.epos.agents; ++i) {
                hc.epos_devices.push_back(w.address_of(ids::kEposDeviceBase + i));
            }
        }
        if (dias_on) {
            hc.dias_gateway = w.address_of(ids::kDiasGateway);
            for (std::uint32_t i = 0; i < cfg.dias.agents; ++i) {
                hc.dias_devices.push_back(w.address_of(ids::kDiasDeviceBase + i));
            }
        }
        w.add_peer(ids::kHarness, [hc, monitor_for] {
            PeerletList l;
            l.push_back(std::make_unique<dyn::HarnessPeerlet>(hc));
            l.push_back(std::make_unique<mon::MonitorPeerlet>(monitor_for()));
            return l;
        });
    }

    // Application agents (devices) and service agents.
    if (epos_on) {
        for (std::uint32_t i = 0; i < cfg.epos.agents; ++i) {
            w.add_peer(ids::kEposDeviceBase + i, [&cfg, i, monitor_for] {
                PeerletList l;
                boot::AppAgentPeerlet::Config ac;
                ac.serv_info = "epos";
                ac.dev_info = {"ev-charger", "site-" + std::to_string(i)};
                data::EvDeviceModel::Config dc;
                dc.seed = cfg.seed;
                dc.ordinal = i;
                dc.plans_per_agent = cfg.epos.plans_per_agent;
                dc.dimension = cfg.epos.dimension;
                dc.alpha = cfg.epos.alpha;
                dc.beta = cfg.epos.beta;
                if (!cfg.epos.plans_dir.empty()) {
                    dc.plans_file = cfg.epos.plans_dir + "/" + data::plan_file_name(i);
                }
                l.push_back(std::make_unique<boot::AppAgentPeerlet>(
                    ac, std::make_unique<data::EvDeviceModel>(dc)));
                l.push_back(std::make_unique<mon::MonitorPeerlet>(monitor_for()));
                return l;
            });
        }
        const std::vector<double> steering = build_steering(cfg);
        for (std::uint32_t i = 0; i < cfg.epos.agents; ++i) {
            w.add_peer(ids::kEposAgentBase + i, [&cfg, steering, monitor_for] {
                PeerletList l;
                epos::EposConfig ec;
                ec.serv_info = "epos";
                ec.iterations = cfg.epos.iterations;
                ec.steering = steering;
                ec.normalize_terms = cfg.epos.normalize_terms;
                ec.straggler_timeout_ms = cfg.epos.straggler_timeout_ms;
                l.push_back(std::make_unique<epos::EposAgentPeerlet>(ec));
                l.push_back(std::make_unique<mon::MonitorPeerlet>(
                    monitor_for({"g", "l", "work_start", "epoch_end"})));
                return l;
            });
        }
    }
    if (dias_on) {
        for (std::uint32_t i = 0; i < cfg.dias.agents; ++i) {
            w.add_peer(ids::kDiasDeviceBase + i, [&cfg, i, monitor_for] {
                PeerletList l;
                boot::AppAgentPeerlet::Config ac;
                ac.serv_info = "dias";
                ac.dev_info = {"news-sensor", "country-" + std::to_string(i)};
                data::NewsDeviceModel::Config dc;
                dc.seed = cfg.seed;
                dc.ordinal = i;
                dc.tick_period_ms = cfg.dias.device_tick_ms;
                dc.k = cfg.dias.k;
                if (cfg.dias.states_mode == "clock") {
                    dc.states_mode = data::NewsDeviceModel::StatesMode::Clock;
                } else if (cfg.dias.states_mode == "static") {
                    dc.states_mode = data::NewsDeviceModel::StatesMode::Static;
                }
                dc.clock_hour_ms = std::max<TimeMs>(1, cfg.dynamics.period_length_ms / 8);
                l.push_back(std::make_unique<boot::AppAgentPeerlet>(
                    ac, std::make_unique<data::NewsDeviceModel>(dc)));
                l.push_back(std::make_unique<mon::MonitorPeerlet>(monitor_for()));
                return l;
            });
        }
        for (std::uint32_t i = 0; i < cfg.dias.agents; ++i) {
            w.add_peer(ids::kDiasAgentBase + i, [&cfg, monitor_for] {
                PeerletList l;
                dias::DiasConfig dc;
                dc.serv_info = "dias";
                dc.view_size = cfg.dias.view_size;
                dc.gossip_period_ms = cfg.dias.gossip_period_ms;
                dc.dissemination_period_ms = cfg.dias.dissemination_period_ms;
                dc.bloom_m = cfg.dias.bloom_m;
                dc.bloom_h = cfg.dias.bloom_h;
                l.push_back(std::make_unique<dias::DiasAgentPeerlet>(dc));
                l.push_back(std::make_unique<mon::MonitorPeerlet>(
                    monitor_for({"raw", "sel", "est"})));
                return l;
            });
        }
    }
}

SimScenario build_sim_scenario(const ScenarioConfig& cfg, const std::string& store_path,
                               const std::function<void(SimConfig&)>& tune) {
    SimScenario s;
    s.cfg = cfg;
    s.store = std::make_unique<mon::RecordStore>(store_path);
    SimConfig sim_cfg;
    sim_cfg.seed = cfg.seed;
    sim_cfg.delivery_delay_ms = cfg.delivery_delay_ms;
    if (tune) {
        tune(sim_cfg);
    }
    s.rt = std::make_unique<SimRuntime>(sim_cfg);

    Wiring w;
    w.address_of = [](PeerId id) { return NetworkAddress::sim(id); };
    SimRuntime* rt = s.rt.get();
    w.add_peer = [rt](PeerId id, PeerletFactory f) { rt->add_peer(id, std::move(f)); };
    wire_scenario(cfg, *s.store, w);
    return s;
}

void run_sim_scenario(SimScenario& s) {
    s.rt->start_all();
    s.rt->run_until(s.cfg.duration_ms);
}

std::vector<std::string> preflight(const ScenarioConfig& cfg) {
    namespace fs = std::filesystem;
    std::vector<std::string> errors = cfg.validate();
    if (cfg.service != ServiceChoice::Dias) {
        if (!cfg.epos.plans_dir.empty()) {
            for (std::uint32_t i = 0; i < cfg.epos.agents; ++i) {
                const std::string path =
                    cfg.epos.plans_dir + "/" + data::plan_file_name(i);
                if (!fs::exists(path)) {
                    errors.push_back("missing plan file: " + path);
                }
            }
        }
        if (!cfg.epos.steering_file.empty() && !fs::exists(cfg.epos.steering_file)) {
            errors.push_back("missing steering file: " + cfg.epos.steering_file);
        }
    }
    return errors;
}

int run_scenario(const ScenarioConfig& cfg) {
    namespace fs = std::filesystem;
    const auto errors = preflight(cfg);
    if (!errors.empty()) {
        for (const auto& e : errors) {
            std::cerr << "config error: " << e << "\n";
        }
        return 2;
    }
    try {
        fs::create_directories(cfg.out_dir);
    } catch (const std::exception& e) {
        std::cerr << "cannot create output dir: " << e.what() << "\n";
        return 2;
    }
    {
        std::ofstream echo(cfg.out_dir + "/config.txt", std::ios::binary);
        echo << cfg.to_text();
    }

    try {
        if (cfg.mode == ExecutionMode::Sim) {
            SimScenario s = build_sim_scenario(cfg, cfg.out_dir + "/store.log");
            run_sim_scenario(s);
            const auto rows = metrics_from_store(cfg, *s.store, false);
            std::ofstream csv(cfg.out_dir + "/metrics.csv", std::ios::binary);
            csv << dyn::metrics_csv(rows);
            s.rt->trace().write_file(cfg.out_dir + "/trace.csv");
            std::ofstream report(cfg.out_dir + "/report.txt", std::ios::binary);
            report << render_report(cfg, rows, *s.store);
            return 0;
        }
        if (cfg.live_processes) {
            std::cerr << "live_processes requires the CLI runner\n";
            return 2;
        }
        return run_live_scenario(cfg);
    } catch (const std::exception& e) {
        std::cerr << "scenario aborted: " << e.what() << "\n";
        std::ofstream marker(cfg.out_dir + "/abort.marker", std::ios::binary);
        marker << e.what() << "\n";
        return 3;
    }
}

} // namespace meshbed::scenario
