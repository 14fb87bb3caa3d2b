#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "meshbed/core/encoding.hpp"
#include "meshbed/scenario/runner.hpp"

namespace meshbed::scenario {

namespace {

struct EpochTimes {
    TimeMs submit = -1;
    TimeMs end = -1;
    TimeMs work_start = -1;
};

// "epoch,t,value" triple from the root agent's service records.
struct CostPoint {
    std::uint64_t epoch = 0;
    std::uint32_t t = 0;
    double value = 0.0;
};

std::optional<CostPoint> parse_cost_point(const std::string& value) {
    const auto parts = split(value, ',');
    if (parts.size() != 3) {
        return std::nullopt;
    }
    const auto epoch = parse_u64(parts[0]);
    const auto t = parse_u64(parts[1]);
    const auto v = parse_double(parts[2]);
    if (!epoch || !t || !v) {
        return std::nullopt;
    }
    return CostPoint{*epoch, static_cast<std::uint32_t>(*t), *v};
}

std::string intensity_at(const ScenarioConfig& cfg, TimeMs ts) {
    if (cfg.dynamics.cycle.empty()) {
        return "LOW";
    }
    const std::size_t idx =
        static_cast<std::size_t>(ts / std::max<TimeMs>(1, cfg.dynamics.period_length_ms));
    return cfg.dynamics.cycle[idx % cfg.dynamics.cycle.size()];
}

} // namespace

std::vector<dyn::MetricsRecord> metrics_from_store(const ScenarioConfig& cfg,
                                                   const mon::RecordStore& store,
                                                   bool live) {
    std::vector<dyn::MetricsRecord> rows;
    const bool epos_on = cfg.service != ServiceChoice::Dias;
    const bool dias_on = cfg.service != ServiceChoice::Epos;

    if (epos_on) {
        std::map<std::uint64_t, std::map<std::uint32_t, double>> g_by_epoch;
        std::map<std::uint64_t, std::map<std::uint32_t, double>> l_by_epoch;
        std::map<std::uint64_t, EpochTimes> times;

        mon::RecordStore::Filter f;
        f.kind = mon::LogKind::Service;
        f.key = "g";
        for (const auto& rec : store.query(f)) {
            if (const auto p = parse_cost_point(rec.value)) {
                g_by_epoch[p->epoch][p->t] = p->value;
            }
        }
        f.key = "l";
        for (const auto& rec : store.query(f)) {
            if (const auto p = parse_cost_point(rec.value)) {
                l_by_epoch[p->epoch][p->t] = p->value;
            }
        }

        mon::RecordStore::Filter ev;
        ev.kind = mon::LogKind::Event;
        ev.key = "epoch_submit";
        for (const auto& rec : store.query(ev)) {
            if (const auto e = parse_u64(rec.value)) {
                auto& t = times[*e];
                if (t.submit < 0) {
                    t.submit = rec.ts_ms;
                }
            }
        }
        ev.key = "epoch_end";
        for (const auto& rec : store.query(ev)) {
            if (const auto e = parse_u64(rec.value)) {
                times[*e].end = rec.ts_ms;
            }
        }
        ev.key = "work_start";
        for (const auto& rec : store.query(ev)) {
            if (const auto e = parse_u64(rec.value)) {
                auto& t = times[*e];
                if (t.work_start < 0 || rec.ts_ms < t.work_start) {
                    t.work_start = rec.ts_ms;
                }
            }
        }

        double static_exec = 0.0;
        TimeMs prev_end = -1;
        for (const auto& [epoch, iters] : g_by_epoch) {
            const auto tit = times.find(epoch);
            if (tit == times.end() || tit->second.end < 0) {
                continue; // epoch did not complete inside the run
            }
            const EpochTimes& et = tit->second;
            const TimeMs base = prev_end >= 0 ? prev_end : et.submit;
            const double exec_ms = static_cast<double>(et.end - base);
            if (static_exec <= 0.0) {
                static_exec = exec_ms; // first completed epoch runs change-free
            }
            std::optional<double> latency;
            std::optional<double> wat;
            if (static_exec > 0.0) {
                latency = dyn::latency_ratio(exec_ms, static_exec);
            }
            if (et.work_start >= 0) {
                const double working = static_cast<double>(et.end - et.work_start);
                const double adaptivity = static_cast<double>(et.work_start - base);
                const double w = dyn::wat_ratio(working, adaptivity);
                if (std::isfinite(w)) {
                    wat = w;
                }
            }
            const std::string intensity = intensity_at(cfg, et.submit);
            for (const auto& [t, cost] : iters) {
                dyn::MetricsRecord row;
                row.run_id = std::to_string(epoch);
                row.t = t;
                (live ? row.g_l : row.g_s) = cost;
                const auto lit = l_by_epoch.find(epoch);
                if (lit != l_by_epoch.end()) {
                    const auto cell = lit->second.find(t);
                    if (cell != lit->second.end()) {
                        (live ? row.l_l : row.l_s) = cell->second;
                    }
                }
                row.latency = latency;
                row.wat = wat;
                row.intensity = intensity;
                rows.push_back(std::move(row));
            }
            prev_end = et.end;
        }
    }

    if (dias_on) {
        struct Series {
            std::vector<std::pair<TimeMs, double>> points;
            double last_before(TimeMs t, bool& found) const {
                found = false;
                double out = 0.0;
                for (const auto& [ts, v] : points) {
                    if (ts > t) {
                        break;
                    }
                    out = v;
                    found = true;
                }
                return out;
            }
        };
        std::map<PeerId, Series> est;
        std::map<PeerId, Series> raw;
        std::map<PeerId, std::vector<std::pair<TimeMs, bool>>> liveness;

        mon::RecordStore::Filter f;
        f.kind = mon::LogKind::Service;
        f.key = "est";
        for (const auto& rec : store.query(f)) {
            const auto parts = split(rec.value, ',');
            if (parts.empty()) {
                continue;
            }
            if (const auto v = parse_double(parts[0])) {
                est[rec.agent].points.emplace_back(rec.ts_ms, *v);
            }
        }
        f.key = "raw";
        for (const auto& rec : store.query(f)) {
            const auto parts = split(rec.value, ',');
            if (parts.size() != 2) {
                continue;
            }
            if (const auto v = parse_double(parts[1])) {
                raw[rec.agent].points.emplace_back(rec.ts_ms, *v);
            }
        }
        mon::RecordStore::Filter ev;
        ev.kind = mon::LogKind::Event;
        ev.key = "dias_leave";
        for (const auto& rec : store.query(ev)) {
            liveness[rec.agent].emplace_back(rec.ts_ms, false);
        }
        ev.key = "dias_join";
        for (const auto& rec : store.query(ev)) {
            liveness[rec.agent].emplace_back(rec.ts_ms, true);
        }
        for (auto& [agent, events] : liveness) {
            std::sort(events.begin(), events.end());
        }
        const auto is_live = [&](PeerId agent, TimeMs t) {
            bool alive = true;
            const auto it = liveness.find(agent);
            if (it == liveness.end()) {
                return true;
            }
            for (const auto& [ts, up] : it->second) {
                if (ts > t) {
                    break;
                }
                alive = up;
            }
            return alive;
        };

        const TimeMs period = cfg.dias.dissemination_period_ms;
        std::int64_t sample = 0;
        for (TimeMs t = period; t < cfg.duration_ms; t += period) {
            double true_sum = 0.0;
            std::vector<double> estimates;
            for (const auto& [agent, series] : est) {
                if (!is_live(agent, t)) {
                    continue;
                }
                bool found_est = false;
                const double e = series.last_before(t, found_est);
                bool found_raw = false;
                const auto rit = raw.find(agent);
                const double r =
                    rit == raw.end() ? 0.0 : rit->second.last_before(t, found_raw);
                if (!found_est || !found_raw) {
                    continue;
                }
                estimates.push_back(e);
                true_sum += r;
            }
            ++sample;
            if (estimates.empty()) {
                continue;
            }
            dyn::MetricsRecord row;
            row.run_id = "dias";
            row.t = sample;
            row.dias_err = dyn::dias_instant_error(true_sum, estimates);
            row.intensity = intensity_at(cfg, t);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<dyn::MetricsRecord> compare_runs(const std::vector<dyn::MetricsRecord>& sim_rows,
                                             const std::vector<dyn::MetricsRecord>& live_rows) {
    std::map<std::pair<std::string, std::int64_t>, const dyn::MetricsRecord*> live_index;
    for (const auto& row : live_rows) {
        live_index[{row.run_id, row.t}] = &row;
    }
    if (live_index.size() != live_rows.size()) {
        throw std::invalid_argument("duplicate (run, t) keys in live metrics");
    }
    std::vector<dyn::MetricsRecord> merged;
    std::size_t matched = 0;
    for (const auto& sim : sim_rows) {
        const auto it = live_index.find({sim.run_id, sim.t});
        if (it == live_index.end()) {
            throw std::invalid_argument("live metrics missing run " + sim.run_id + " t=" +
                                        std::to_string(sim.t));
        }
        ++matched;
        const dyn::MetricsRecord& live = *it->second;
        dyn::MetricsRecord row = sim;
        row.g_l = live.g_l ? live.g_l : live.g_s;
        row.l_l = live.l_l ? live.l_l : live.l_s;
        if (row.g_s && row.g_l && *row.g_s != 0.0) {
            row.rel_g = dyn::relative_difference(*row.g_s, *row.g_l);
        }
        if (row.l_s && row.l_l && *row.l_s != 0.0) {
            row.rel_l = dyn::relative_difference(*row.l_s, *row.l_l);
        }
        merged.push_back(std::move(row));
    }
    if (matched != live_index.size()) {
        throw std::invalid_argument("metrics shapes differ: sim " +
                                    std::to_string(sim_rows.size()) + " rows vs live " +
                                    std::to_string(live_rows.size()));
    }
    return merged;
}

std::string render_report(const ScenarioConfig& cfg,
                          const std::vector<dyn::MetricsRecord>& rows,
                          const mon::RecordStore& store) {
    std::ostringstream o;
    o << "scenario report\n";
    o << "===============\n";
    o << "mode: " << (cfg.mode == ExecutionMode::Sim ? "SIM" : "LIVE") << "\n";
    o << "seed: " << cfg.seed << "\n";
    o << "records persisted: " << store.committed() << "\n";

    const bool epos_on = cfg.service != ServiceChoice::Dias;
    const bool dias_on = cfg.service != ServiceChoice::Epos;

    if (epos_on) {
        std::map<std::string, std::vector<const dyn::MetricsRecord*>> by_epoch;
        for (const auto& row : rows) {
            if (row.run_id != "dias") {
                by_epoch[row.run_id].push_back(&row);
            }
        }
        o << "\nlearning runs completed: " << by_epoch.size() << "\n";
        if (!by_epoch.empty()) {
            // numerically last epoch
            std::uint64_t last = 0;
            for (const auto& [id, recs] : by_epoch) {
                if (const auto e = parse_u64(id)) {
                    last = std::max(last, *e);
                }
            }
            const auto& final_rows = by_epoch[std::to_string(last)];
            const dyn::MetricsRecord* final_row = nullptr;
            o << "final run per-iteration global cost:\n";
            for (const auto* row : final_rows) {
                const auto g = row->g_s ? row->g_s : row->g_l;
                if (g) {
                    o << "  t=" << row->t << " g=" << format_double(*g) << "\n";
                }
                if (!final_row || row->t > final_row->t) {
                    final_row = row;
                }
            }
            if (final_row) {
                const auto g = final_row->g_s ? final_row->g_s : final_row->g_l;
                if (g) {
                    o << "final global cost: " << format_double(*g) << "\n";
                }
            }
            // latency / WAT means per intensity
            std::map<std::string, std::pair<double, int>> latency_acc;
            std::map<std::string, std::pair<double, int>> wat_acc;
            std::set<std::string> seen_epochs;
            for (const auto& row : rows) {
                if (row.run_id == "dias" || !seen_epochs.insert(row.run_id).second) {
                    continue;
                }
                if (row.latency) {
                    auto& acc = latency_acc[row.intensity];
                    acc.first += *row.latency;
                    acc.second += 1;
                }
                if (row.wat) {
                    auto& acc = wat_acc[row.intensity];
                    acc.first += *row.wat;
                    acc.second += 1;
                }
            }
            for (const auto& [level, acc] : latency_acc) {
                o << "mean latency ratio [" << level << "]: "
                  << format_double(acc.first / acc.second) << "\n";
            }
            for (const auto& [level, acc] : wat_acc) {
                o << "mean WAT [" << level << "]: " << format_double(acc.first / acc.second)
                  << "\n";
            }
        }
    }

    if (dias_on) {
        std::vector<double> errs;
        for (const auto& row : rows) {
            if (row.run_id == "dias" && row.dias_err) {
                errs.push_back(*row.dias_err);
            }
        }
        o << "\naggregation error samples: " << errs.size() << "\n";
        if (!errs.empty()) {
            double mean = 0.0;
            double mx = 0.0;
            for (const double e : errs) {
                mean += e;
                mx = std::max(mx, e);
            }
            mean /= static_cast<double>(errs.size());
            o << "mean |error|: " << format_double(mean) << "\n";
            o << "max |error|: " << format_double(mx) << "\n";
            o << "final |error|: " << format_double(errs.back()) << "\n";
        }
    }
    return o.str();
}

} // namespace meshbed::scenario
