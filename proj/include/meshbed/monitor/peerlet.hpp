#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "meshbed/monitor/record.hpp"
#include "meshbed/net/address.hpp"
#include "meshbed/runtime/peer.hpp"
#include "meshbed/runtime/peerlet.hpp"

namespace meshbed::mon {

// Agent-side monitoring peerlet: buffers service/event/memory records
// locally and ships them to the logging gateway in batches on its own timer,
// so logging never adds messages on the service path.
class MonitorPeerlet : public Peerlet {
public:
    struct Config {
        NetworkAddress gateway;
        std::string auth_token;
        std::size_t buffer_capacity = 1024;
        TimeMs flush_period_ms = 50;
        // Memory logger: probe is sampled every memory_period_ms (0 = off).
        TimeMs memory_period_ms = 0;
        std::function<std::int64_t()> memory_probe;
        std::vector<std::string> schema_keys;
    };

    explicit MonitorPeerlet(Config cfg);

    std::string_view name() const override { return "monitor"; }

    void start() override;
    void stop() override;
    bool handle_message(const Envelope& env) override;
    void handle_timer(TimerId id) override;

    // Returns false when the local buffer overflowed (oldest record was
    // evicted to make room).
    bool log(LogKind kind, std::string_view key, std::string_view value);
    bool log_num(LogKind kind, std::string_view key, double value);

    std::uint64_t emitted() const { return emitted_; }
    std::uint64_t dropped_local() const { return dropped_local_; }
    std::uint64_t rejected() const { return rejected_; }

    // Default probe: resident set size from /proc/self/statm.
    static std::int64_t rss_bytes();

private:
    void flush();

    Config cfg_;
    std::deque<LogRecord> buffer_;
    TimerId flush_timer_ = 0;
    TimerId memory_timer_ = 0;
    std::uint64_t batch_seq_ = 0;
    std::uint64_t emitted_ = 0;
    std::uint64_t dropped_local_ = 0;
    std::uint64_t rejected_ = 0;
};

// Convenience: log through the peer's monitor peerlet if one is present.
bool log_via(Peer& peer, LogKind kind, std::string_view key, std::string_view value);

} // namespace meshbed::mon
