#include "meshbed/epos/plan.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "meshbed/core/encoding.hpp"

namespace meshbed::epos {

void PlanSet::validate() const {
    if (plans.empty()) {
        throw std::invalid_argument("plan set is empty");
    }
    const std::size_t d = plans[0].values.size();
    if (d == 0) {
        throw std::invalid_argument("plan dimension is zero");
    }
    for (const auto& plan : plans) {
        if (plan.values.size() != d) {
            throw std::invalid_argument("plans with mixed dimensions");
        }
        if (!std::isfinite(plan.local_cost) || plan.local_cost < 0.0) {
            throw std::invalid_argument("local cost must be finite and >= 0");
        }
        for (const double v : plan.values) {
            if (!std::isfinite(v) || v < 0.0) {
                throw std::invalid_argument("plan values must be finite and >= 0");
            }
        }
    }
}

void AgentPreferences::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0) ||
        alpha + beta > 1.0) {
        throw std::invalid_argument("preferences need alpha,beta in [0,1], alpha+beta <= 1");
    }
}

std::string format_plan_set(const PlanSet& set) {
    std::string out;
    for (const auto& plan : set.plans) {
        out += format_double(plan.local_cost);
        out += ':';
        for (std::size_t i = 0; i < plan.values.size(); ++i) {
            if (i != 0) {
                out += ',';
            }
            out += format_double(plan.values[i]);
        }
        out += '\n';
    }
    return out;
}

PlanSet parse_plan_set(const std::string& text) {
    PlanSet set;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string trimmed = trim(line);
        if (trimmed.empty()) {
            continue;
        }
        const std::size_t colon = trimmed.find(':');
        if (colon == std::string::npos) {
            throw std::invalid_argument("plan line " + std::to_string(line_no) +
                                        ": missing ':'");
        }
        Plan plan;
        const auto cost = parse_double(trim(trimmed.substr(0, colon)));
        if (!cost) {
            throw std::invalid_argument("plan line " + std::to_string(line_no) +
                                        ": bad local cost");
        }
        plan.local_cost = *cost;
        for (const auto& piece : split(trimmed.substr(colon + 1), ',')) {
            const auto v = parse_double(trim(piece));
            if (!v) {
                throw std::invalid_argument("plan line " + std::to_string(line_no) +
                                            ": bad value '" + piece + "'");
            }
            plan.values.push_back(*v);
        }
        set.plans.push_back(std::move(plan));
    }
    set.validate();
    return set;
}

PlanSet load_plan_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot open plan file: " + path);
    }
    std::ostringstream buf;
    buf << f.rdbuf();
    try {
        return parse_plan_set(buf.str());
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void save_plan_file(const std::string& path, const PlanSet& set) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot write plan file: " + path);
    }
    f << format_plan_set(set);
}

} // namespace meshbed::epos
