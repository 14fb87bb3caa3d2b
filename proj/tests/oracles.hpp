#pragma once

// Independent reference oracles for the acceptance and unit suites. These
// deliberately re-derive every formula from scratch (no calls into the
// library's cost/aggregation code) so they stay a second opinion.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace oracle {

struct PlanChoice {
    std::vector<double> values;
    double local_cost = 0.0;
};

using AgentPlans = std::vector<PlanChoice>;

enum class CostKind { Variance, Rmse };

inline double combo_cost(const std::vector<AgentPlans>& agents,
                         const std::vector<std::size_t>& pick, CostKind kind,
                         const std::vector<double>& steering) {
    const std::size_t d = agents.at(0).at(0).values.size();
    std::vector<double> total(d, 0.0);
    for (std::size_t a = 0; a < agents.size(); ++a) {
        const auto& plan = agents[a].at(pick[a]);
        for (std::size_t i = 0; i < d; ++i) {
            total[i] += plan.values[i];
        }
    }
    if (kind == CostKind::Variance) {
        double mean = 0.0;
        for (const double v : total) {
            mean += v;
        }
        mean /= static_cast<double>(d);
        double acc = 0.0;
        for (const double v : total) {
            acc += (v - mean) * (v - mean);
        }
        return acc / static_cast<double>(d);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double diff = total[i] - steering.at(i);
        acc += diff * diff;
    }
    return std::sqrt(acc / static_cast<double>(d));
}

struct ExhaustiveResult {
    double optimum = 0.0;
    std::uint64_t combinations = 0;
};

// Exhaustive minimum global cost over every plan combination (the alpha =
// beta = 0 objective). Bounds keep enumeration under a second.
inline ExhaustiveResult epos_exhaustive(const std::vector<AgentPlans>& agents,
                                        CostKind kind,
                                        const std::vector<double>& steering = {}) {
    if (agents.empty() || agents.size() > 6) {
        throw std::invalid_argument("oracle bounds: 1..6 agents");
    }
    for (const auto& plans : agents) {
        if (plans.empty() || plans.size() > 3) {
            throw std::invalid_argument("oracle bounds: 1..3 plans per agent");
        }
        for (const auto& plan : plans) {
            if (plan.values.empty() || plan.values.size() > 4) {
                throw std::invalid_argument("oracle bounds: dimension 1..4");
            }
        }
    }
    ExhaustiveResult out;
    out.optimum = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> pick(agents.size(), 0);
    while (true) {
        out.optimum = std::min(out.optimum, combo_cost(agents, pick, kind, steering));
        ++out.combinations;
        std::size_t i = 0;
        while (i < pick.size()) {
            if (++pick[i] < agents[i].size()) {
                break;
            }
            pick[i] = 0;
            ++i;
        }
        if (i == pick.size()) {
            return out;
        }
    }
}

// ---------------------------------------------------------------------------

struct SupplierEvent {
    std::int64_t ts = 0;
    std::uint64_t supplier = 0;
    double value = 0.0;
    bool alive = true; // false: graceful leave at ts
};

struct Aggregates {
    double sum = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::uint64_t count = 0;
};

// Central replay of supplier state history: exact aggregates at time t.
inline Aggregates dias_replay(const std::vector<SupplierEvent>& log, std::int64_t t) {
    std::map<std::uint64_t, std::pair<double, bool>> state; // value, alive
    for (const auto& ev : log) {
        if (ev.ts > t) {
            break; // log must be time-ordered
        }
        state[ev.supplier] = {ev.value, ev.alive};
    }
    Aggregates agg;
    bool first = true;
    for (const auto& [supplier, value_alive] : state) {
        if (!value_alive.second) {
            continue;
        }
        const double v = value_alive.first;
        agg.sum += v;
        agg.count += 1;
        if (first || v < agg.min) {
            agg.min = v;
        }
        if (first || v > agg.max) {
            agg.max = v;
        }
        first = false;
    }
    return agg;
}

// ---------------------------------------------------------------------------

struct BinomialCheck {
    double expected_mean = 0.0;
    double sigma = 0.0;
    bool within(double observed_mean, double n_sigma) const {
        return std::abs(observed_mean - expected_mean) <= n_sigma * sigma;
    }
};

inline BinomialCheck binomial_mean_check(std::uint64_t trials_per_sample,
                                         std::uint64_t samples, double p) {
    BinomialCheck c;
    const double n = static_cast<double>(trials_per_sample);
    c.expected_mean = n * p;
    // stddev of the mean of `samples` binomial draws
    c.sigma = std::sqrt(n * p * (1.0 - p) / static_cast<double>(samples));
    return c;
}

} // namespace oracle
