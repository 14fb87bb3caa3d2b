#include "meshbed/dias/states.hpp"

#include <cmath>
#include <stdexcept>

namespace meshbed::dias {

void PossibleStates::validate() const {
    if (states.empty()) {
        throw std::invalid_argument("possible states empty");
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (!std::isfinite(states[i])) {
            throw std::invalid_argument("possible state not finite");
        }
        if (i > 0 && !(states[i - 1] < states[i])) {
            throw std::invalid_argument("possible states must be sorted and distinct");
        }
    }
}

std::size_t summarize(double raw, const PossibleStates& states) {
    if (states.states.empty()) {
        throw std::invalid_argument("summarize with empty state set");
    }
    std::size_t best = 0;
    double best_dist = std::abs(raw - states.states[0]);
    for (std::size_t i = 1; i < states.states.size(); ++i) {
        const double dist = std::abs(raw - states.states[i]);
        if (dist < best_dist) { // strict: ties keep the lower value
            best_dist = dist;
            best = i;
        }
    }
    return best;
}

} // namespace meshbed::dias
