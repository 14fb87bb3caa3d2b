#include "meshbed/epos/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace meshbed::epos {

double unfairness(const CostMoments& moments) {
    if (moments.count == 0) {
        throw std::invalid_argument("unfairness over zero agents");
    }
    const double n = static_cast<double>(moments.count);
    const double mean = moments.sum / n;
    const double var = moments.sumsq / n - mean * mean;
    return std::sqrt(std::max(0.0, var));
}

double population_variance(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("variance of empty vector");
    }
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (const double v : values) {
        mean += v;
    }
    mean /= n;
    double var = 0.0;
    for (const double v : values) {
        var += (v - mean) * (v - mean);
    }
    return var / n;
}

std::string_view gcf_name(GlobalCostKind kind) {
    return kind == GlobalCostKind::MinVar ? "MIN_VAR" : "MIN_RMSE";
}

std::optional<GlobalCostKind> gcf_from_name(std::string_view name) {
    if (name == "MIN_VAR") return GlobalCostKind::MinVar;
    if (name == "MIN_RMSE") return GlobalCostKind::MinRmse;
    return std::nullopt;
}

double GlobalCostFunction::evaluate(std::span<const double> total) const {
    if (total.empty()) {
        throw std::invalid_argument("global cost of empty vector");
    }
    if (kind == GlobalCostKind::MinVar) {
        return population_variance(total);
    }
    if (steering.size() != total.size()) {
        throw std::invalid_argument("steering dimension " + std::to_string(steering.size()) +
                                    " != total dimension " + std::to_string(total.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < total.size(); ++i) {
        const double diff = total[i] - steering[i];
        acc += diff * diff;
    }
    return std::sqrt(acc / static_cast<double>(total.size()));
}

std::size_t select_plan(const SelectionInput& in) {
    if (in.plans == nullptr || in.plans->plans.empty()) {
        throw std::invalid_argument("select_plan: empty plan set");
    }
    if (in.gcf == nullptr) {
        throw std::invalid_argument("select_plan: no global cost function");
    }
    in.prefs.validate();
    const PlanSet& plans = *in.plans;
    const std::size_t d = plans.dimension();
    if (in.context.size() != d) {
        throw std::invalid_argument("select_plan: context dimension mismatch");
    }

    const std::size_t n = plans.size();
    std::vector<double> g(n);
    std::vector<double> l(n);
    std::vector<double> u(n);
    std::vector<double> candidate(d);
    for (std::size_t j = 0; j < n; ++j) {
        const Plan& plan = plans.plans[j];
        for (std::size_t i = 0; i < d; ++i) {
            candidate[i] = in.context[i] + plan.values[i];
        }
        g[j] = in.gcf->evaluate(candidate);
        l[j] = plan.local_cost;
        CostMoments with = in.base_moments;
        with.add(plan.local_cost);
        u[j] = unfairness(with);
    }

    if (in.normalize_terms) {
        const auto rescale = [](std::vector<double>& xs) {
            const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
            const double span = *hi - *lo;
            if (span <= 0.0) {
                std::fill(xs.begin(), xs.end(), 0.0);
                return;
            }
            for (auto& x : xs) {
                x = (x - *lo) / span;
            }
        };
        rescale(g);
        rescale(l);
        rescale(u);
    }

    const double wg = in.prefs.global_weight();
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        const double cost = wg * g[j] + in.prefs.beta * l[j] + in.prefs.alpha * u[j];
        if (cost < best_cost) {
            best_cost = cost;
            best = j;
        }
    }
    return best;
}

} // namespace meshbed::epos
