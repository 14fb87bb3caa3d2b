#pragma once

#include "meshbed/core/ids.hpp"
#include "meshbed/net/envelope.hpp"

namespace meshbed {

class Peer;
struct SendReceipt;

// Execution backend contract shared by SimRuntime and LiveRuntime.
class RuntimeCore {
public:
    virtual ~RuntimeCore() = default;

    virtual ExecutionMode mode() const = 0;
    virtual TimeMs now_ms() const = 0;
    virtual TimerId schedule_timer(Peer& owner, TimeMs delay_ms, bool periodic,
                                   TimeMs period_ms) = 0;
    virtual void cancel_timer(Peer& owner, TimerId id) = 0;
    virtual SendReceipt send_from(Peer& sender, Envelope env) = 0;
};

} // namespace meshbed
