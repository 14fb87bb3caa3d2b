#include "meshbed/dias/sampling.hpp"

#include <algorithm>
#include <map>

#include "meshbed/core/encoding.hpp"

namespace meshbed::dias {

bool PeerView::contains(const NetworkAddress& addr) const {
    for (const auto& e : entries) {
        if (e.address == addr) {
            return true;
        }
    }
    return false;
}

void PeerView::age_all() {
    for (auto& e : entries) {
        ++e.age;
    }
}

std::optional<NetworkAddress> PeerView::oldest() const {
    if (entries.empty()) {
        return std::nullopt;
    }
    const Entry* best = &entries[0];
    for (const auto& e : entries) {
        if (e.age > best->age ||
            (e.age == best->age && e.address.to_string() < best->address.to_string())) {
            best = &e;
        }
    }
    return best->address;
}

std::vector<PeerView::Entry> PeerView::exchange_half(const NetworkAddress& self) const {
    std::vector<Entry> sorted = entries;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
        if (a.age != b.age) return a.age > b.age;
        return a.address.to_string() < b.address.to_string();
    });
    const std::size_t half = (sorted.size() + 1) / 2;
    sorted.resize(half);
    sorted.push_back(Entry{self, 0});
    return sorted;
}

void PeerView::merge(const std::vector<Entry>& incoming, const NetworkAddress& self) {
    std::map<std::string, Entry> by_addr;
    for (const auto& e : entries) {
        by_addr.emplace(e.address.to_string(), e);
    }
    for (const auto& e : incoming) {
        if (e.address == self) {
            continue;
        }
        auto [it, inserted] = by_addr.emplace(e.address.to_string(), e);
        if (!inserted && e.age < it->second.age) {
            it->second.age = e.age; // duplicate kept once with min age
        }
    }
    std::vector<Entry> merged;
    merged.reserve(by_addr.size());
    for (auto& [key, e] : by_addr) {
        merged.push_back(std::move(e));
    }
    std::stable_sort(merged.begin(), merged.end(), [](const Entry& a, const Entry& b) {
        if (a.age != b.age) return a.age < b.age; // freshest first
        return a.address.to_string() < b.address.to_string();
    });
    if (merged.size() > capacity) {
        merged.resize(capacity);
    }
    entries = std::move(merged);
}

std::string encode_view_entries(const std::vector<PeerView::Entry>& entries) {
    std::string out;
    for (const auto& e : entries) {
        if (!out.empty()) {
            out += ' ';
        }
        out += e.address.to_string();
        out += ',';
        out += std::to_string(e.age);
    }
    return out;
}

std::optional<std::vector<PeerView::Entry>> decode_view_entries(std::string_view body) {
    std::vector<PeerView::Entry> out;
    if (body.empty()) {
        return out;
    }
    for (const auto& piece : split(body, ' ')) {
        const auto parts = split(piece, ',');
        if (parts.size() != 2) {
            return std::nullopt;
        }
        const auto addr = NetworkAddress::parse(parts[0]);
        const auto age = parse_u64(parts[1]);
        if (!addr || !age) {
            return std::nullopt;
        }
        out.push_back(PeerView::Entry{*addr, *age});
    }
    return out;
}

} // namespace meshbed::dias
