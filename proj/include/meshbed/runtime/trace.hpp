#pragma once

#include <string>
#include <vector>

#include "meshbed/core/ids.hpp"

namespace meshbed {

struct TraceEvent {
    enum class Kind { Delivery, Timer };

    TimeMs ts_ms = 0;
    PeerId peer = 0; // recipient for deliveries, owner for timers
    Kind kind = Kind::Delivery;
    std::string detail;

    bool operator==(const TraceEvent&) const = default;
};

// Ordered record of everything a run did. Serializes to
// `timestamp_ms,peer_id,event_kind,detail` lines with the detail
// percent-encoded, which is also the byte-equality determinism check.
class EventTrace {
public:
    void record(TimeMs ts, PeerId peer, TraceEvent::Kind kind, std::string detail);

    const std::vector<TraceEvent>& events() const { return events_; }
    bool empty() const { return events_.empty(); }
    std::size_t size() const { return events_.size(); }

    std::string serialize() const;
    void write_file(const std::string& path) const;

    bool operator==(const EventTrace&) const = default;

private:
    std::vector<TraceEvent> events_;
};

} // namespace meshbed
