#include "meshbed/dynamics/schedule.hpp"

#include <algorithm>
#include <stdexcept>

namespace meshbed::dyn {

std::string_view intensity_name(Intensity level) {
    switch (level) {
    case Intensity::Low: return "LOW";
    case Intensity::Medium: return "MEDIUM";
    case Intensity::High: return "HIGH";
    }
    return "?";
}

std::optional<Intensity> intensity_from_name(std::string_view name) {
    if (name == "LOW") return Intensity::Low;
    if (name == "MEDIUM" || name == "MED") return Intensity::Medium;
    if (name == "HIGH") return Intensity::High;
    return std::nullopt;
}

EposRates epos_rates_for(Intensity level) {
    switch (level) {
    case Intensity::Low: return EposRates{0.10, 0.10, 0.10, 0.10};
    case Intensity::Medium: return EposRates{0.20, 0.20, 0.20, 0.20};
    case Intensity::High: return EposRates{0.50, 0.50, 0.50, 0.50};
    }
    return {};
}

namespace {

constexpr double kPaperPeriodMinutes = 8.0 * 60.0;

TimeMs scaled(double paper_minutes, TimeMs period_length_ms) {
    const double ms =
        static_cast<double>(period_length_ms) * paper_minutes / kPaperPeriodMinutes;
    return std::max<TimeMs>(1, static_cast<TimeMs>(ms));
}

} // namespace

DiasPeriods dias_periods_for(Intensity level, TimeMs period_length_ms) {
    DiasPeriods p;
    switch (level) {
    case Intensity::Low:
        p.possible_state_period_ms = scaled(3.0 * 60.0, period_length_ms);
        p.selected_state_period_ms = scaled(5.0, period_length_ms);
        p.churn_period_ms = scaled(10.0, period_length_ms);
        break;
    case Intensity::Medium:
        p.possible_state_period_ms = scaled(2.0 * 60.0, period_length_ms);
        p.selected_state_period_ms = scaled(2.0, period_length_ms);
        p.churn_period_ms = scaled(5.0, period_length_ms);
        break;
    case Intensity::High:
        p.possible_state_period_ms = scaled(1.0 * 60.0, period_length_ms);
        p.selected_state_period_ms = scaled(1.0, period_length_ms);
        p.churn_period_ms = scaled(2.0, period_length_ms);
        break;
    }
    return p;
}

void IntensitySchedule::validate() const {
    if (cycle.empty()) {
        throw std::invalid_argument("intensity cycle must be non-empty");
    }
    if (period_length_ms <= 0) {
        throw std::invalid_argument("period length must be positive");
    }
}

Intensity IntensitySchedule::level_at(TimeMs now_ms) const {
    validate();
    return cycle[period_index(now_ms) % cycle.size()];
}

std::size_t IntensitySchedule::period_index(TimeMs now_ms) const {
    if (now_ms < 0) {
        return 0;
    }
    return static_cast<std::size_t>(now_ms / period_length_ms);
}

} // namespace meshbed::dyn
