#include "meshbed/data/plangen.hpp"

#include <filesystem>
#include <stdexcept>

#include "meshbed/core/rng.hpp"

namespace meshbed::data {

std::uint32_t horizon_dimension(Horizon h) {
    switch (h) {
    case Horizon::D1: return 1440;
    case Horizon::D3: return 4320;
    case Horizon::D7: return 10080;
    }
    return 0;
}

std::optional<Horizon> horizon_from_name(std::string_view name) {
    if (name == "D1") return Horizon::D1;
    if (name == "D3") return Horizon::D3;
    if (name == "D7") return Horizon::D7;
    return std::nullopt;
}

std::string_view horizon_name(Horizon h) {
    switch (h) {
    case Horizon::D1: return "D1";
    case Horizon::D3: return "D3";
    case Horizon::D7: return "D7";
    }
    return "?";
}

epos::PlanSet generate_agent_plans(std::uint64_t seed, std::uint64_t ordinal,
                                   std::uint64_t change_counter,
                                   std::uint32_t plans_per_agent,
                                   std::uint32_t dimension) {
    if (plans_per_agent == 0 || dimension == 0) {
        throw std::invalid_argument("plan generation needs plans_per_agent and dimension > 0");
    }
    Rng base(seed);
    Rng rng = base.fork(ordinal * 1000003ULL + change_counter);

    epos::PlanSet set;
    for (std::uint32_t p = 0; p < plans_per_agent; ++p) {
        epos::Plan plan;
        plan.values.assign(dimension, 0.0);
        const std::uint64_t windows = 1 + rng.uniform_u64(3);
        for (std::uint64_t w = 0; w < windows; ++w) {
            // Charging window: contiguous block of constant demand.
            const std::uint64_t max_len = std::max<std::uint64_t>(1, dimension / 6);
            const std::uint64_t min_len = std::max<std::uint64_t>(1, dimension / 24);
            const std::uint64_t len =
                min_len + rng.uniform_u64(std::max<std::uint64_t>(1, max_len - min_len + 1));
            const std::uint64_t start = rng.uniform_u64(dimension);
            const double demand_kw = 1.0 + 10.0 * rng.uniform_real();
            for (std::uint64_t i = 0; i < len; ++i) {
                const std::uint64_t slot = (start + i) % dimension;
                plan.values[slot] += demand_kw;
            }
        }
        // Discomfort: likelihood of needing the vehicle while it charges.
        plan.local_cost = rng.uniform_real();
        set.plans.push_back(std::move(plan));
    }
    set.validate();
    return set;
}

std::string plan_file_name(std::uint64_t ordinal) {
    return "agent_" + std::to_string(ordinal) + ".plans";
}

void generate_plans(const PlanDatasetSpec& spec, const std::string& out_dir) {
    if (spec.num_agents == 0) {
        throw std::invalid_argument("dataset needs at least one agent");
    }
    std::filesystem::create_directories(out_dir);
    const std::uint32_t d = horizon_dimension(spec.horizon);
    for (std::uint32_t a = 0; a < spec.num_agents; ++a) {
        const epos::PlanSet set =
            generate_agent_plans(spec.seed, a, 0, spec.plans_per_agent, d);
        epos::save_plan_file(out_dir + "/" + plan_file_name(a), set);
    }
}

} // namespace meshbed::data
