#pragma once

#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "meshbed/core/ids.hpp"
#include "meshbed/net/envelope.hpp"

namespace meshbed {

class Peer;

// Pluggable module hosted by a Peer. Callbacks for one peer are never
// concurrent; peerlets own no threads of their own.
class Peerlet {
public:
    virtual ~Peerlet() = default;

    virtual std::string_view name() const = 0;

    virtual void init(Peer& peer) { peer_ = &peer; }
    virtual void start() {}
    virtual void stop() {}

    // Return true when the message was consumed; dispatch stops at the first
    // consumer in peerlet list order.
    virtual bool handle_message(const Envelope& env) {
        (void)env;
        return false;
    }

    virtual void handle_timer(TimerId id) { (void)id; }

protected:
    Peer* peer_ = nullptr;
};

using PeerletList = std::vector<std::unique_ptr<Peerlet>>;
using PeerletFactory = std::function<PeerletList()>;

} // namespace meshbed
