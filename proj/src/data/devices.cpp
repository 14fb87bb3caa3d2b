#include "meshbed/data/devices.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "meshbed/core/encoding.hpp"

namespace meshbed::data {

EvDeviceModel::EvDeviceModel(Config cfg)
    : cfg_(std::move(cfg)), alpha_(cfg_.alpha), beta_(cfg_.beta) {
    if (!cfg_.plans_file.empty()) {
        plans_ = epos::load_plan_file(cfg_.plans_file);
    } else {
        regenerate();
    }
}

void EvDeviceModel::regenerate() {
    plans_ = generate_agent_plans(cfg_.seed, cfg_.ordinal, plan_changes_,
                                  cfg_.plans_per_agent, cfg_.dimension);
}

std::string EvDeviceModel::sense(std::string_view what, TimeMs, Rng&) {
    if (what != "plans") {
        return {};
    }
    FieldRecord rec;
    rec.set_f64("alpha", alpha_);
    rec.set_f64("beta", beta_);
    rec.set("plans", epos::format_plan_set(plans_));
    return rec.encode();
}

void EvDeviceModel::command(std::string_view cmd, const FieldRecord& args, TimeMs, Rng&) {
    if (cmd == "plan_change") {
        ++plan_changes_;
        regenerate();
        return;
    }
    if (cmd == "weight_change") {
        alpha_ = args.get_f64("alpha").value_or(alpha_);
        beta_ = args.get_f64("beta").value_or(beta_);
    }
}

void EvDeviceModel::actuate(std::string_view payload) {
    // "plan_index=<j>" from the run's final iteration
    const auto rec = FieldRecord::decode(payload);
    if (rec) {
        if (const auto idx = rec->get_u64("plan_index")) {
            last_selected_ = static_cast<std::size_t>(*idx);
        }
    }
}

NewsDeviceModel::NewsDeviceModel(Config cfg)
    : cfg_(std::move(cfg)), tick_period_(cfg_.tick_period_ms) {}

void NewsDeviceModel::refresh_clock_states(TimeMs now, Rng& rng) {
    // Clock-anchored states: k values in [H*100, (H+1)*100) where H is the
    // current (scaled) hour, mimicking readings like 1400..1500.
    const std::int64_t hour = (now / std::max<TimeMs>(1, cfg_.clock_hour_ms)) % 24;
    const double lo = static_cast<double>(hour) * 100.0;
    std::set<double> values;
    while (values.size() < cfg_.k) {
        values.insert(std::floor(lo + rng.uniform_real() * 100.0));
    }
    states_.states.assign(values.begin(), values.end());
    states_.validate();
}

std::string NewsDeviceModel::tick_payload() {
    FieldRecord rec;
    rec.set_f64("raw", last_raw_);
    rec.set_u64("tick", tick_count_);
    std::string states_text;
    for (std::size_t i = 0; i < states_.states.size(); ++i) {
        if (i != 0) {
            states_text += ',';
        }
        states_text += format_double(states_.states[i]);
    }
    rec.set("states", states_text);
    return rec.encode();
}

std::string NewsDeviceModel::tick(TimeMs now, Rng& rng) {
    ++tick_count_;
    switch (cfg_.states_mode) {
    case StatesMode::FromStream: {
        NewsSynth synth(cfg_.seed, static_cast<std::uint32_t>(cfg_.ordinal) + 1);
        last_raw_ = static_cast<double>(
            synth.source_tick(static_cast<std::uint32_t>(cfg_.ordinal), tick_count_));
        window_.push_back(last_raw_);
        while (window_.size() > cfg_.window) {
            window_.pop_front();
        }
        const std::vector<double> w(window_.begin(), window_.end());
        Rng state_rng = Rng(cfg_.seed).fork(0x5354ULL + tick_count_ * 131ULL + cfg_.ordinal);
        states_ = derive_possible_states(w, cfg_.k, cfg_.window, state_rng);
        break;
    }
    case StatesMode::Clock: {
        if (states_.states.empty()) {
            refresh_clock_states(now, rng);
        }
        const double lo = states_.states.front();
        const double hi = states_.states.back();
        last_raw_ = std::floor(rng.uniform_real(lo, hi + 1.0));
        break;
    }
    case StatesMode::Static: {
        if (states_.states.empty()) {
            Rng init = Rng(cfg_.seed).fork(0x57A7ULL + cfg_.ordinal);
            std::set<double> values;
            while (values.size() < cfg_.k) {
                values.insert(std::floor(init.uniform_real(1000.0, 1100.0)));
            }
            states_.states.assign(values.begin(), values.end());
            states_.validate();
            last_raw_ = init.uniform_real(states_.states.front(), states_.states.back());
        }
        break; // reading and states stay fixed
    }
    }
    return tick_payload();
}

std::string NewsDeviceModel::sense(std::string_view what, TimeMs now, Rng& rng) {
    if (what != "stream") {
        return {};
    }
    if (tick_count_ == 0) {
        return tick(now, rng); // first reading primes the stream
    }
    return tick_payload();
}

void NewsDeviceModel::command(std::string_view cmd, const FieldRecord& args, TimeMs now,
                              Rng& rng) {
    if (cmd == "possible_states" && cfg_.states_mode == StatesMode::Clock) {
        refresh_clock_states(now, rng);
        return;
    }
    if (cmd == "tick_period") {
        if (const auto ms = args.get_u64("ms")) {
            tick_period_ = static_cast<TimeMs>(*ms);
        }
    }
}

} // namespace meshbed::data
