#include "meshbed/scenario/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "meshbed/core/encoding.hpp"
#include "meshbed/dynamics/schedule.hpp"
#include "meshbed/epos/cost.hpp"

namespace meshbed::scenario {

namespace {

struct KeyHandler {
    std::function<bool(ScenarioConfig&, const std::string&)> apply; // false = bad value
};

std::map<std::string, KeyHandler> build_handlers() {
    std::map<std::string, KeyHandler> h;
    const auto u64 = [](std::uint64_t& slot) {
        return [&slot](const std::string& v) {
            const auto parsed = parse_u64(v);
            if (!parsed) return false;
            slot = *parsed;
            return true;
        };
    };
    (void)u64;

    auto add = [&h](const std::string& key,
                    std::function<bool(ScenarioConfig&, const std::string&)> fn) {
        h.emplace(key, KeyHandler{std::move(fn)});
    };

    auto set_u64 = [](auto member) {
        return [member](ScenarioConfig& c, const std::string& v) {
            const auto parsed = parse_u64(v);
            if (!parsed) return false;
            std::invoke(member, c) = *parsed;
            return true;
        };
    };
    (void)set_u64;

    add("scenario.mode", [](ScenarioConfig& c, const std::string& v) {
        if (v == "SIM") {
            c.mode = ExecutionMode::Sim;
        } else if (v == "LIVE") {
            c.mode = ExecutionMode::Live;
        } else {
            return false;
        }
        return true;
    });
    add("scenario.service", [](ScenarioConfig& c, const std::string& v) {
        if (v == "EPOS") {
            c.service = ServiceChoice::Epos;
        } else if (v == "DIAS") {
            c.service = ServiceChoice::Dias;
        } else if (v == "BOTH") {
            c.service = ServiceChoice::Both;
        } else {
            return false;
        }
        return true;
    });
    add("scenario.seed", [](ScenarioConfig& c, const std::string& v) {
        const auto p = parse_u64(v);
        if (!p) return false;
        c.seed = *p;
        return true;
    });
    add("scenario.out_dir", [](ScenarioConfig& c, const std::string& v) {
        c.out_dir = v;
        return !v.empty();
    });
    add("scenario.duration_ms", [](ScenarioConfig& c, const std::string& v) {
        const auto p = parse_i64(v);
        if (!p || *p <= 0) return false;
        c.duration_ms = *p;
        return true;
    });
    add("scenario.base_port", [](ScenarioConfig& c, const std::string& v) {
        const auto p = parse_u64(v);
        if (!p || *p == 0 || *p > 0xffff) return false;
        c.base_port = static_cast<std::uint16_t>(*p);
        return true;
    });
    add("scenario.delivery_delay_ms", [](ScenarioConfig& c, const std::string& v) {
        const auto p = parse_i64(v);
        if (!p || *p < 0) return false;
        c.delivery_delay_ms = *p;
        return true;
    });
    add("scenario.live_lockstep", [](ScenarioConfig& c, const std::string& v) {
        if (v != "0" && v != "1") return false;
        c.live_lockstep = v == "1";
        return true;
    });
    add("scenario.live_processes", [](ScenarioConfig& c, const std::string& v) {
        if (v != "0" && v != "1") return false;
        c.live_processes = v == "1";
        return true;
    });

    const auto u32_field = [&add](const std::string& key, std::uint32_t ScenarioConfig::Epos::*member) {
        add(key, [member](ScenarioConfig& c, const std::string& v) {
            const auto p = parse_u64(v);
            if (!p || *p > 0xffffffffULL) return false;
            c.epos.*member = static_cast<std::uint32_t>(*p);
            return true;
        });
    };
    u32_field("epos.agents", &ScenarioConfig::Epos::agents);
    u32_field("epos.plans_per_agent", &ScenarioConfig::Epos::plans_per_agent);
    u32_field("epos.dimension", &ScenarioConfig::Epos::dimension);
    u32_field("epos.iterations", &ScenarioConfig::Epos::iterations);
    add("epos.alpha", [](ScenarioConfig& c, const std::string& v) {
        const auto p = parse_double(v);
        if (!p) return false;
        c.epos.alpha = *p;
        return true;
    });
    add("epos.beta", [](ScenarioConfig& c, const std::string& v) {
        const auto p = parse_double(v);
        if (!p) return false;
        c.epos.beta = *p;
        return true;
    });
    add("epos.cost_function", [](ScenarioConfig& c, const std::string& v) {
        c.epos.cost_function = v;
        return true;
    });
    add("epos.steering_file", [](ScenarioConfig& c, const std::string& v) {
        c.epos.steering_file = v;
        return true;
    });
    add("epos.plans_dir", [](ScenarioConfig& c, const std::string& v) {
        c.epos.plans_dir = v;
        return true;
    });
    add("epos.normalize_terms", [](ScenarioConfig& c, const std::string& v) {
        if (v != "0" && v != "1") return false;
        c.epos.normalize_terms = v == "1";
        return true;
    });
    add("epos.straggler_timeout_ms", [](ScenarioConfig& c, const std::string& v) {
        const auto p = parse_i64(v);
        if (!p || *p < 0) return false;
        c.epos.straggler_timeout_ms = *p;
        return true;
    });
    add("epos.max_epochs", [](ScenarioConfig& c, const std::string& v) {
        const auto p = parse_u64(v);
        if (!p) return false;
        c.epos.max_epochs = *p;
        return true;
    });

    const auto dias_u32 = [&add](const std::string& key, std::uint32_t ScenarioConfig::Dias::*member) {
        add(key, [member](ScenarioConfig& c, const std::string& v) {
            const auto p = parse_u64(v);
            if (!p || *p > 0xffffffffULL) return false;
            c.dias.*member = static_cast<std::uint32_t>(*p);
            return true;
        });
    };
    dias_u32("dias.agents", &ScenarioConfig::Dias::agents);
    dias_u32("dias.view_size", &ScenarioConfig::Dias::view_size);
    dias_u32("dias.bloom_m", &ScenarioConfig::Dias::bloom_m);
    dias_u32("dias.bloom_h", &ScenarioConfig::Dias::bloom_h);
    dias_u32("dias.k", &ScenarioConfig::Dias::k);
    const auto dias_ms = [&add](const std::string& key, TimeMs ScenarioConfig::Dias::*member) {
        add(key, [member](ScenarioConfig& c, const std::string& v) {
            const auto p = parse_i64(v);
            if (!p || *p <= 0) return false;
            c.dias.*member = *p;
            return true;
        });
    };
    dias_ms("dias.gossip_period_ms", &ScenarioConfig::Dias::gossip_period_ms);
    dias_ms("dias.dissemination_period_ms", &ScenarioConfig::Dias::dissemination_period_ms);
    dias_ms("dias.device_tick_ms", &ScenarioConfig::Dias::device_tick_ms);
    add("dias.states_mode", [](ScenarioConfig& c, const std::string& v) {
        if (v != "stream" && v != "clock" && v != "static") return false;
        c.dias.states_mode = v;
        return true;
    });

    add("dynamics.inject", [](ScenarioConfig& c, const std::string& v) {
        if (v != "0" && v != "1") return false;
        c.dynamics.inject = v == "1";
        return true;
    });
    add("dynamics.period_length_ms", [](ScenarioConfig& c, const std::string& v) {
        const auto p = parse_i64(v);
        if (!p || *p <= 0) return false;
        c.dynamics.period_length_ms = *p;
        return true;
    });
    add("dynamics.cycle", [](ScenarioConfig& c, const std::string& v) {
        c.dynamics.cycle = split(v, ',');
        return !c.dynamics.cycle.empty();
    });
    add("dynamics.change_stagger_ms", [](ScenarioConfig& c, const std::string& v) {
        const auto p = parse_i64(v);
        if (!p || *p < 0) return false;
        c.dynamics.change_stagger_ms = *p;
        return true;
    });

    add("monitor.auth_token", [](ScenarioConfig& c, const std::string& v) {
        c.monitor.auth_token = v;
        return !v.empty();
    });
    add("monitor.commit_batch", [](ScenarioConfig& c, const std::string& v) {
        const auto p = parse_u64(v);
        if (!p || *p == 0) return false;
        c.monitor.commit_batch = static_cast<std::uint32_t>(*p);
        return true;
    });
    add("monitor.flush_period_ms", [](ScenarioConfig& c, const std::string& v) {
        const auto p = parse_i64(v);
        if (!p || *p <= 0) return false;
        c.monitor.flush_period_ms = *p;
        return true;
    });
    add("monitor.commit_period_ms", [](ScenarioConfig& c, const std::string& v) {
        const auto p = parse_i64(v);
        if (!p || *p <= 0) return false;
        c.monitor.commit_period_ms = *p;
        return true;
    });
    add("monitor.memory_period_ms", [](ScenarioConfig& c, const std::string& v) {
        const auto p = parse_i64(v);
        if (!p || *p < 0) return false;
        c.monitor.memory_period_ms = *p;
        return true;
    });
    return h;
}

} // namespace

ScenarioConfig ScenarioConfig::parse(const std::string& text,
                                     std::vector<std::string>& errors) {
    static const std::map<std::string, KeyHandler> handlers = build_handlers();

    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const std::string key = section + "." + trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        const auto it = handlers.find(key);
        if (it == handlers.end()) {
            errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key +
                             "'");
            continue;
        }
        if (!it->second.apply(cfg, value)) {
            errors.push_back("line " + std::to_string(line_no) + ": bad value '" + value +
                             "' for '" + key + "'");
        }
    }
    for (const auto& violation : cfg.validate()) {
        errors.push_back(violation);
    }
    return cfg;
}

ScenarioConfig ScenarioConfig::parse_file(const std::string& path,
                                          std::vector<std::string>& errors) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        errors.push_back("cannot open config file: " + path);
        return {};
    }
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse(buf.str(), errors);
}

std::vector<std::string> ScenarioConfig::validate() const {
    std::vector<std::string> out;
    const bool epos_on = service != ServiceChoice::Dias;
    const bool dias_on = service != ServiceChoice::Epos;
    if (epos_on) {
        if (epos.agents == 0) out.push_back("epos.agents must be >= 1");
        if (epos.plans_per_agent == 0) out.push_back("epos.plans_per_agent must be >= 1");
        if (epos.dimension == 0) out.push_back("epos.dimension must be >= 1");
        if (epos.iterations == 0) out.push_back("epos.iterations must be >= 1");
        if (!(epos.alpha >= 0.0 && epos.alpha <= 1.0)) {
            out.push_back("epos.alpha must be in [0,1]");
        }
        if (!(epos.beta >= 0.0 && epos.beta <= 1.0)) {
            out.push_back("epos.beta must be in [0,1]");
        }
        if (epos.alpha + epos.beta > 1.0) {
            out.push_back("epos.alpha + epos.beta must be <= 1");
        }
        if (!epos::gcf_from_name(epos.cost_function)) {
            out.push_back("epos.cost_function must be MIN_VAR or MIN_RMSE");
        }
    }
    if (dias_on) {
        if (dias.agents == 0) out.push_back("dias.agents must be >= 1");
        if (dias.view_size == 0) out.push_back("dias.view_size must be >= 1");
        if (dias.bloom_m == 0) out.push_back("dias.bloom_m must be >= 1");
        if (dias.bloom_h == 0) out.push_back("dias.bloom_h must be >= 1");
        if (dias.k == 0) out.push_back("dias.k must be >= 1");
    }
    if (dynamics.cycle.empty()) {
        out.push_back("dynamics.cycle must name at least one intensity");
    }
    for (const auto& level : dynamics.cycle) {
        if (!dyn::intensity_from_name(level)) {
            out.push_back("dynamics.cycle has unknown intensity '" + level + "'");
        }
    }
    if (duration_ms <= 0) {
        out.push_back("scenario.duration_ms must be positive");
    }
    return out;
}

std::string ScenarioConfig::to_text() const {
    std::ostringstream o;
    o << "[scenario]\n";
    o << "mode = " << (mode == ExecutionMode::Sim ? "SIM" : "LIVE") << "\n";
    o << "service = "
      << (service == ServiceChoice::Epos ? "EPOS"
          : service == ServiceChoice::Dias ? "DIAS" : "BOTH")
      << "\n";
    o << "seed = " << seed << "\n";
    o << "out_dir = " << out_dir << "\n";
    o << "duration_ms = " << duration_ms << "\n";
    o << "base_port = " << base_port << "\n";
    o << "delivery_delay_ms = " << delivery_delay_ms << "\n";
    o << "live_lockstep = " << (live_lockstep ? 1 : 0) << "\n";
    o << "live_processes = " << (live_processes ? 1 : 0) << "\n";
    o << "\n[epos]\n";
    o << "agents = " << epos.agents << "\n";
    o << "plans_per_agent = " << epos.plans_per_agent << "\n";
    o << "dimension = " << epos.dimension << "\n";
    o << "iterations = " << epos.iterations << "\n";
    o << "alpha = " << format_double(epos.alpha) << "\n";
    o << "beta = " << format_double(epos.beta) << "\n";
    o << "cost_function = " << epos.cost_function << "\n";
    if (!epos.steering_file.empty()) o << "steering_file = " << epos.steering_file << "\n";
    if (!epos.plans_dir.empty()) o << "plans_dir = " << epos.plans_dir << "\n";
    o << "normalize_terms = " << (epos.normalize_terms ? 1 : 0) << "\n";
    o << "straggler_timeout_ms = " << epos.straggler_timeout_ms << "\n";
    o << "max_epochs = " << epos.max_epochs << "\n";
    o << "\n[dias]\n";
    o << "agents = " << dias.agents << "\n";
    o << "view_size = " << dias.view_size << "\n";
    o << "gossip_period_ms = " << dias.gossip_period_ms << "\n";
    o << "dissemination_period_ms = " << dias.dissemination_period_ms << "\n";
    o << "bloom_m = " << dias.bloom_m << "\n";
    o << "bloom_h = " << dias.bloom_h << "\n";
    o << "k = " << dias.k << "\n";
    o << "states_mode = " << dias.states_mode << "\n";
    o << "device_tick_ms = " << dias.device_tick_ms << "\n";
    o << "\n[dynamics]\n";
    o << "inject = " << (dynamics.inject ? 1 : 0) << "\n";
    o << "period_length_ms = " << dynamics.period_length_ms << "\n";
    o << "cycle = ";
    for (std::size_t i = 0; i < dynamics.cycle.size(); ++i) {
        if (i != 0) o << ",";
        o << dynamics.cycle[i];
    }
    o << "\n";
    o << "change_stagger_ms = " << dynamics.change_stagger_ms << "\n";
    o << "\n[monitor]\n";
    o << "auth_token = " << monitor.auth_token << "\n";
    o << "commit_batch = " << monitor.commit_batch << "\n";
    o << "flush_period_ms = " << monitor.flush_period_ms << "\n";
    o << "commit_period_ms = " << monitor.commit_period_ms << "\n";
    o << "memory_period_ms = " << monitor.memory_period_ms << "\n";
    return o.str();
}

} // namespace meshbed::scenario
