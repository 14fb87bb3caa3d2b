#include "meshbed/dynamics/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "meshbed/core/encoding.hpp"

namespace meshbed::dyn {

double relative_difference(double sim_value, double live_value) {
    if (sim_value == 0.0) {
        throw std::invalid_argument("relative difference undefined for sim value 0");
    }
    return (sim_value - live_value) / sim_value;
}

double latency_ratio(double varying_ms, double static_ms) {
    if (!(static_ms > 0.0)) {
        throw std::invalid_argument("latency ratio needs static time > 0");
    }
    return varying_ms / static_ms;
}

double wat_ratio(double working_ms, double adaptivity_ms) {
    if (adaptivity_ms < 0.0) {
        throw std::invalid_argument("negative adaptivity time");
    }
    if (adaptivity_ms == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return working_ms / adaptivity_ms;
}

double dias_instant_error(double true_sum, std::span<const double> estimates) {
    if (estimates.empty()) {
        throw std::invalid_argument("no estimates");
    }
    double mean = 0.0;
    for (const double e : estimates) {
        mean += e;
    }
    mean /= static_cast<double>(estimates.size());
    return std::abs(true_sum - mean);
}

RollingMean::RollingMean(std::size_t window) : window_(window) {
    if (window == 0) {
        throw std::invalid_argument("rolling window must be positive");
    }
}

double RollingMean::push(double value) {
    values_.push_back(value);
    sum_ += value;
    if (values_.size() > window_) {
        sum_ -= values_.front();
        values_.pop_front();
    }
    return mean();
}

double RollingMean::mean() const {
    if (values_.empty()) {
        return 0.0;
    }
    return sum_ / static_cast<double>(values_.size());
}

namespace {

std::string cell(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{};
}

std::optional<double> parse_cell(const std::string& s) {
    if (s.empty()) {
        return std::nullopt;
    }
    const auto v = parse_double(s);
    if (!v) {
        throw std::invalid_argument("bad metrics cell: " + s);
    }
    return v;
}

} // namespace

std::string metrics_csv_header() {
    return "run_id,t,g_s,g_l,l_s,l_l,rel_g,rel_l,latency,wat,dias_err,intensity\n";
}

std::string metrics_csv_row(const MetricsRecord& rec) {
    std::string out = rec.run_id;
    out += ',';
    out += std::to_string(rec.t);
    for (const auto* v : {&rec.g_s, &rec.g_l, &rec.l_s, &rec.l_l, &rec.rel_g, &rec.rel_l,
                          &rec.latency, &rec.wat, &rec.dias_err}) {
        out += ',';
        out += cell(*v);
    }
    out += ',';
    out += rec.intensity;
    out += '\n';
    return out;
}

std::string metrics_csv(const std::vector<MetricsRecord>& rows) {
    std::string out = metrics_csv_header();
    for (const auto& rec : rows) {
        out += metrics_csv_row(rec);
    }
    return out;
}

std::vector<MetricsRecord> parse_metrics_csv(const std::string& text) {
    std::vector<MetricsRecord> out;
    bool first = true;
    for (const auto& line : split(text, '\n')) {
        if (first) {
            first = false;
            continue; // header
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto cols = split(line, ',');
        if (cols.size() != 12) {
            throw std::invalid_argument("metrics row needs 12 columns: " + line);
        }
        MetricsRecord rec;
        rec.run_id = cols[0];
        const auto t = parse_i64(cols[1]);
        if (!t) {
            throw std::invalid_argument("bad iteration index: " + line);
        }
        rec.t = *t;
        rec.g_s = parse_cell(cols[2]);
        rec.g_l = parse_cell(cols[3]);
        rec.l_s = parse_cell(cols[4]);
        rec.l_l = parse_cell(cols[5]);
        rec.rel_g = parse_cell(cols[6]);
        rec.rel_l = parse_cell(cols[7]);
        rec.latency = parse_cell(cols[8]);
        rec.wat = parse_cell(cols[9]);
        rec.dias_err = parse_cell(cols[10]);
        rec.intensity = cols[11];
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace meshbed::dyn
