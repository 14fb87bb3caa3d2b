#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "meshbed/core/ids.hpp"
#include "meshbed/net/address.hpp"

namespace meshbed::dias {

// Partial membership view maintained by the peer sampling service.
struct PeerView {
    struct Entry {
        NetworkAddress address;
        std::uint64_t age = 0;
    };

    std::size_t capacity = 10;
    std::vector<Entry> entries; // no duplicate addresses, |entries| <= capacity

    bool contains(const NetworkAddress& addr) const;
    void age_all();

    // Oldest entry (highest age; address order breaks ties).
    std::optional<NetworkAddress> oldest() const;

    // Age-descending half of the view plus the sender itself at age 0 —
    // the exchange buffer of one gossip round.
    std::vector<Entry> exchange_half(const NetworkAddress& self) const;

    // Merge incoming entries: deduplicate by address keeping the minimum
    // age, drop self, keep the `capacity` freshest.
    void merge(const std::vector<Entry>& incoming, const NetworkAddress& self);
};

std::string encode_view_entries(const std::vector<PeerView::Entry>& entries);
std::optional<std::vector<PeerView::Entry>> decode_view_entries(std::string_view body);

} // namespace meshbed::dias
