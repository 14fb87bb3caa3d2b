#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace meshbed::epos {

// One demand schedule: a fixed-dimension non-negative vector plus the
// user-side discomfort of picking it.
struct Plan {
    std::vector<double> values;
    double local_cost = 0.0;

    bool operator==(const Plan&) const = default;
};

struct PlanSet {
    std::vector<Plan> plans;

    std::size_t size() const { return plans.size(); }
    std::size_t dimension() const { return plans.empty() ? 0 : plans[0].values.size(); }

    // All plans share one dimension, entries finite and non-negative,
    // local costs finite and >= 0.
    void validate() const;

    bool operator==(const PlanSet&) const = default;
};

struct AgentPreferences {
    double alpha = 0.0; // unfairness weight
    double beta = 0.0;  // local-cost weight

    void validate() const; // alpha, beta in [0,1], alpha+beta <= 1
    double global_weight() const { return 1.0 - (alpha + beta); }
};

// Plan file format, one plan per line: `local_cost:v1,v2,...,vd`.
std::string format_plan_set(const PlanSet& set);
PlanSet parse_plan_set(const std::string& text); // throws on malformed input

PlanSet load_plan_file(const std::string& path);
void save_plan_file(const std::string& path, const PlanSet& set);

} // namespace meshbed::epos
