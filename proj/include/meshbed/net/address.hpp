#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "meshbed/core/ids.hpp"

namespace meshbed {

// Peer endpoint. SIM addresses name a peer directly ("sim:<id>"); LIVE
// addresses are TCP "host:port". Both render and parse through the same
// "host:port"-shaped string form.
struct NetworkAddress {
    enum class Kind { Sim, Tcp };

    Kind kind = Kind::Sim;
    std::uint64_t sim_id = 0;
    std::string host;
    std::uint16_t port = 0;

    static NetworkAddress sim(PeerId id) {
        NetworkAddress a;
        a.kind = Kind::Sim;
        a.sim_id = id;
        return a;
    }

    static NetworkAddress tcp(std::string host, std::uint16_t port) {
        NetworkAddress a;
        a.kind = Kind::Tcp;
        a.host = std::move(host);
        a.port = port;
        return a;
    }

    bool is_sim() const { return kind == Kind::Sim; }

    std::string to_string() const;
    static std::optional<NetworkAddress> parse(std::string_view text);

    friend auto operator<=>(const NetworkAddress&, const NetworkAddress&) = default;
};

} // namespace meshbed
