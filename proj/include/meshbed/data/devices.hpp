#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>

#include "meshbed/bootstrap/app_agent.hpp"
#include "meshbed/data/news.hpp"
#include "meshbed/data/plangen.hpp"

namespace meshbed::data {

// EV charging device: holds the agent's alternative charging plans and its
// preference weights. Serves "plans" sensing requests; plan_change and
// weight_change commands mutate the device state for the next run.
class EvDeviceModel : public boot::DeviceModel {
public:
    struct Config {
        std::uint64_t seed = 0;
        std::uint64_t ordinal = 0;
        std::uint32_t plans_per_agent = 4;
        std::uint32_t dimension = 0;
        double alpha = 0.0;
        double beta = 0.0;
        std::string plans_file; // non-empty: initial plans come from disk
    };

    explicit EvDeviceModel(Config cfg);

    std::string sense(std::string_view what, TimeMs now, Rng& rng) override;
    void command(std::string_view cmd, const FieldRecord& args, TimeMs now,
                 Rng& rng) override;
    void actuate(std::string_view payload) override;

    std::uint64_t plan_changes() const { return plan_changes_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    const epos::PlanSet& plans() const { return plans_; }
    std::optional<std::size_t> last_selected() const { return last_selected_; }

private:
    void regenerate();

    Config cfg_;
    epos::PlanSet plans_;
    double alpha_;
    double beta_;
    std::uint64_t plan_changes_ = 0;
    std::optional<std::size_t> last_selected_;
};

// News-count device: a bursty integer stream summarized into k possible
// states. State modes: derived from the stream's recent window (per-tick),
// clock-anchored random states refreshed by a possible_states command, or
// fully static (fixed states, fixed reading).
class NewsDeviceModel : public boot::DeviceModel {
public:
    enum class StatesMode { FromStream, Clock, Static };

    struct Config {
        std::uint64_t seed = 0;
        std::uint64_t ordinal = 0;
        TimeMs tick_period_ms = 1000;
        std::size_t k = 9;
        std::size_t window = 27;
        StatesMode states_mode = StatesMode::FromStream;
        TimeMs clock_hour_ms = 7500; // desk-scaled "hour" for Clock ranges
    };

    explicit NewsDeviceModel(Config cfg);

    std::string sense(std::string_view what, TimeMs now, Rng& rng) override;
    void command(std::string_view cmd, const FieldRecord& args, TimeMs now,
                 Rng& rng) override;
    TimeMs tick_period_ms() const override { return tick_period_; }
    std::string tick(TimeMs now, Rng& rng) override;

    std::uint64_t ticks() const { return tick_count_; }
    double last_raw() const { return last_raw_; }
    const dias::PossibleStates& states() const { return states_; }

private:
    std::string tick_payload();
    void refresh_clock_states(TimeMs now, Rng& rng);

    Config cfg_;
    TimeMs tick_period_;
    std::uint64_t tick_count_ = 0;
    double last_raw_ = 0.0;
    std::deque<double> window_;
    dias::PossibleStates states_;
};

} // namespace meshbed::data
