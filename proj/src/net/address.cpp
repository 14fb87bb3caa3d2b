#include "meshbed/net/address.hpp"

#include "meshbed/core/encoding.hpp"

namespace meshbed {

std::string NetworkAddress::to_string() const {
    if (kind == Kind::Sim) {
        return "sim:" + std::to_string(sim_id);
    }
    return host + ":" + std::to_string(port);
}

std::optional<NetworkAddress> NetworkAddress::parse(std::string_view text) {
    const std::size_t colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 >= text.size()) {
        return std::nullopt;
    }
    const std::string_view head = text.substr(0, colon);
    const std::string_view tail = text.substr(colon + 1);
    if (head == "sim") {
        const auto id = parse_u64(tail);
        if (!id) {
            return std::nullopt;
        }
        return sim(*id);
    }
    const auto port = parse_u64(tail);
    if (!port || *port > 0xffff) {
        return std::nullopt;
    }
    return tcp(std::string(head), static_cast<std::uint16_t>(*port));
}

} // namespace meshbed
