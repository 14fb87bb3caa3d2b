#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace meshbed::epos {

// Balanced binary overlay over agent ordinals. Built identically by every
// agent from the member list and the epoch seed.
struct TreeTopology {
    std::uint64_t root = 0;
    std::map<std::uint64_t, std::optional<std::uint64_t>> parent;
    std::map<std::uint64_t, std::vector<std::uint64_t>> children;

    std::size_t size() const { return parent.size(); }
    std::size_t depth() const;
    bool contains(std::uint64_t id) const { return parent.count(id) != 0; }

    // Single root, acyclic, connected, fan-out <= 2, depth <= ceil(log2(n+1)).
    void validate() const;
};

// Complete binary tree over a seed-shuffled agent order; deterministic for a
// given (ids, seed). Rejects an empty id list.
TreeTopology build_tree(std::vector<std::uint64_t> agent_ids, std::uint64_t seed);

} // namespace meshbed::epos
