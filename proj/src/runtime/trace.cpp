#include "meshbed/runtime/trace.hpp"

#include <fstream>
#include <stdexcept>

#include "meshbed/core/encoding.hpp"

namespace meshbed {

void EventTrace::record(TimeMs ts, PeerId peer, TraceEvent::Kind kind, std::string detail) {
    events_.push_back(TraceEvent{ts, peer, kind, std::move(detail)});
}

std::string EventTrace::serialize() const {
    std::string out;
    for (const auto& ev : events_) {
        out += std::to_string(ev.ts_ms);
        out += ',';
        out += std::to_string(ev.peer);
        out += ',';
        out += ev.kind == TraceEvent::Kind::Delivery ? "delivery" : "timer";
        out += ',';
        out += percent_encode(ev.detail, ",");
        out += '\n';
    }
    return out;
}

void EventTrace::write_file(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot open trace file: " + path);
    }
    f << serialize();
}

} // namespace meshbed
