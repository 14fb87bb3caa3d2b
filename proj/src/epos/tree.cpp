#include "meshbed/epos/tree.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "meshbed/core/rng.hpp"

namespace meshbed::epos {

std::size_t TreeTopology::depth() const {
    std::size_t best = 0;
    for (const auto& [id, par] : parent) {
        std::size_t d = 0;
        std::uint64_t cur = id;
        while (parent.at(cur).has_value()) {
            cur = *parent.at(cur);
            ++d;
        }
        best = std::max(best, d);
    }
    return best;
}

void TreeTopology::validate() const {
    if (parent.empty()) {
        throw std::invalid_argument("empty topology");
    }
    std::size_t roots = 0;
    for (const auto& [id, par] : parent) {
        if (!par) {
            ++roots;
            if (id != root) {
                throw std::logic_error("root mismatch");
            }
        }
    }
    if (roots != 1) {
        throw std::logic_error("topology must have exactly one root");
    }
    std::set<std::uint64_t> reached;
    std::vector<std::uint64_t> stack{root};
    while (!stack.empty()) {
        const std::uint64_t cur = stack.back();
        stack.pop_back();
        if (!reached.insert(cur).second) {
            throw std::logic_error("cycle in topology");
        }
        const auto it = children.find(cur);
        if (it == children.end()) {
            continue;
        }
        if (it->second.size() > 2) {
            throw std::logic_error("fan-out above 2");
        }
        for (const std::uint64_t c : it->second) {
            if (!parent.count(c) || parent.at(c) != cur) {
                throw std::logic_error("parent/child maps disagree");
            }
            stack.push_back(c);
        }
    }
    if (reached.size() != parent.size()) {
        throw std::logic_error("topology is disconnected");
    }
    const std::size_t n = parent.size();
    const std::size_t bound =
        static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n) + 1.0)));
    if (depth() > bound) {
        throw std::logic_error("tree deeper than balanced bound");
    }
}

TreeTopology build_tree(std::vector<std::uint64_t> agent_ids, std::uint64_t seed) {
    if (agent_ids.empty()) {
        throw std::invalid_argument("build_tree: no agents");
    }
    Rng rng(seed);
    rng.shuffle(agent_ids);

    TreeTopology tree;
    tree.root = agent_ids[0];
    const std::size_t n = agent_ids.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t id = agent_ids[i];
        tree.parent[id] =
            i == 0 ? std::optional<std::uint64_t>{} : std::optional{agent_ids[(i - 1) / 2]};
        auto& kids = tree.children[id];
        if (2 * i + 1 < n) {
            kids.push_back(agent_ids[2 * i + 1]);
        }
        if (2 * i + 2 < n) {
            kids.push_back(agent_ids[2 * i + 2]);
        }
    }
    return tree;
}

} // namespace meshbed::epos
