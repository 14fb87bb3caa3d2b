#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "meshbed/epos/plan.hpp"

namespace meshbed::epos {

// Running moments of the selected plans' local costs, carried bottom-up so
// the dispersion term can be evaluated without a full cost list.
struct CostMoments {
    double sum = 0.0;
    double sumsq = 0.0;
    std::uint64_t count = 0;

    void add(double local_cost) {
        sum += local_cost;
        sumsq += local_cost * local_cost;
        ++count;
    }

    CostMoments& operator+=(const CostMoments& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        count += o.count;
        return *this;
    }

    CostMoments operator+(const CostMoments& o) const {
        CostMoments r = *this;
        r += o;
        return r;
    }

    // Valid only when `o` accounts for a subset of these moments.
    CostMoments operator-(const CostMoments& o) const {
        CostMoments r = *this;
        r.sum -= o.sum;
        r.sumsq -= o.sumsq;
        r.count -= o.count;
        return r;
    }

    double mean() const { return count == 0 ? 0.0 : sum / static_cast<double>(count); }
};

// Population standard deviation from running moments, clamped at zero
// against negative rounding residue. count == 0 is rejected.
double unfairness(const CostMoments& moments);

double population_variance(std::span<const double> values);

enum class GlobalCostKind { MinVar, MinRmse };

std::string_view gcf_name(GlobalCostKind kind);
std::optional<GlobalCostKind> gcf_from_name(std::string_view name);

struct GlobalCostFunction {
    GlobalCostKind kind = GlobalCostKind::MinVar;
    std::vector<double> steering; // MinRmse target, same dimension as plans

    // MinVar: population variance of the entries. MinRmse: rms distance to
    // the steering vector. Dimension mismatches are rejected.
    double evaluate(std::span<const double> total) const;
};

struct SelectionInput {
    const PlanSet* plans = nullptr;
    AgentPreferences prefs;
    const GlobalCostFunction* gcf = nullptr;
    std::span<const double> context;  // aggregate the candidate is added to
    CostMoments base_moments;         // moments excluding the candidate
    bool normalize_terms = false;     // per-agent min-max rescaling, off by default
};

// Eq-style weighted argmin over the agent's plans; ties break to the lowest
// index. Throws on an empty plan set or dimension mismatch.
std::size_t select_plan(const SelectionInput& in);

} // namespace meshbed::epos
