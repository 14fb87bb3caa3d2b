#pragma once

#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "meshbed/core/ids.hpp"

namespace meshbed::dyn {

// Relative difference (sim - live) / sim. sim_value must be non-zero.
double relative_difference(double sim_value, double live_value);

// Execution-time ratio under varying vs non-changing dynamics.
double latency_ratio(double varying_ms, double static_ms);

// Working-to-adaptivity time ratio; adaptivity 0 reports the infinity
// sentinel (no adaptation happened at all).
double wat_ratio(double working_ms, double adaptivity_ms);

// |true_sum - mean(estimates)|; estimates must be non-empty.
double dias_instant_error(double true_sum, std::span<const double> estimates);

// Rolling mean over the last `window` pushed values.
class RollingMean {
public:
    explicit RollingMean(std::size_t window);
    double push(double value);
    double mean() const;
    std::size_t size() const { return values_.size(); }

private:
    std::size_t window_;
    std::deque<double> values_;
    double sum_ = 0.0;
};

struct MetricsRecord {
    std::string run_id;
    std::int64_t t = 0;
    std::optional<double> g_s, g_l, l_s, l_l;
    std::optional<double> rel_g, rel_l;
    std::optional<double> latency, wat;
    std::optional<double> dias_err;
    std::string intensity;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRecord& rec);
std::string metrics_csv(const std::vector<MetricsRecord>& rows);
std::vector<MetricsRecord> parse_metrics_csv(const std::string& text); // throws on bad rows

} // namespace meshbed::dyn
