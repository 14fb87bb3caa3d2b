#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "meshbed/core/ids.hpp"

namespace meshbed::dyn {

enum class Intensity { Low, Medium, High };

std::string_view intensity_name(Intensity level);
std::optional<Intensity> intensity_from_name(std::string_view name);

// Per-agent-per-run change probabilities for the collective-learning
// service (the system-wide cost-function switch is one draw per run).
struct EposRates {
    double plan_change = 0.0;
    double weight_change = 0.0;
    double gcf_change = 0.0;
    double churn = 0.0;
};

// Change periods for the aggregation service, already desk-scaled to ms.
struct DiasPeriods {
    TimeMs possible_state_period_ms = 0;
    TimeMs selected_state_period_ms = 0;
    TimeMs churn_period_ms = 0;
};

// Stock rate matrix: 10/20/50% for every learning-service dynamic.
EposRates epos_rates_for(Intensity level);

// Stock periods 3h/2h/1h, 5'/2'/1', 10'/5'/2', scaled so that one 8-hour
// intensity period maps onto period_length_ms.
DiasPeriods dias_periods_for(Intensity level, TimeMs period_length_ms);

struct IntensitySchedule {
    TimeMs period_length_ms = 60000;
    std::vector<Intensity> cycle; // non-empty

    void validate() const;
    Intensity level_at(TimeMs now_ms) const;
    std::size_t period_index(TimeMs now_ms) const;
};

} // namespace meshbed::dyn
