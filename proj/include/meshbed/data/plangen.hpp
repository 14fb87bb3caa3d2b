#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "meshbed/epos/plan.hpp"

namespace meshbed::data {

// Planning horizons with their per-minute dimensions.
enum class Horizon { D1, D3, D7 };

std::uint32_t horizon_dimension(Horizon h); // 1440 / 4320 / 10080
std::optional<Horizon> horizon_from_name(std::string_view name);
std::string_view horizon_name(Horizon h);

struct PlanDatasetSpec {
    std::uint32_t num_agents = 0;
    std::uint32_t plans_per_agent = 4;
    Horizon horizon = Horizon::D1;
    std::uint64_t seed = 0;
};

// Synthetic EV-style charging plans: a few contiguous charging windows of
// constant demand, local cost uniform in [0,1]. Pure function of its
// arguments.
epos::PlanSet generate_agent_plans(std::uint64_t seed, std::uint64_t ordinal,
                                   std::uint64_t change_counter,
                                   std::uint32_t plans_per_agent,
                                   std::uint32_t dimension);

// Writes one plan file per agent (`agent_<ordinal>.plans`) under out_dir.
void generate_plans(const PlanDatasetSpec& spec, const std::string& out_dir);

std::string plan_file_name(std::uint64_t ordinal);

} // namespace meshbed::data
