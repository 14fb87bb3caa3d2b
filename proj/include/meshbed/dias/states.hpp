#pragma once

#include <cstdint>
#include <vector>

#include "meshbed/core/ids.hpp"

namespace meshbed::dias {

// Summarization alphabet: the k admissible values a raw stream is mapped to.
struct PossibleStates {
    std::vector<double> states; // sorted ascending, no duplicates

    std::size_t k() const { return states.size(); }
    void validate() const; // non-empty, sorted, distinct, finite
};

struct SelectedState {
    PeerId supplier = 0;
    std::size_t state_index = 0;
    double value = 0.0;
    std::uint64_t version = 0;
};

// Index of the state nearest to `raw` by absolute distance; ties go to the
// lower value. Rejects an empty state set.
std::size_t summarize(double raw, const PossibleStates& states);

} // namespace meshbed::dias
