#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "meshbed/monitor/store.hpp"
#include "meshbed/runtime/peer.hpp"
#include "meshbed/runtime/peerlet.hpp"

namespace meshbed::mon {

// Logging gateway: single writer in front of the record store. Performs
// authorization, per-agent batch deduplication and chunked commits.
class LogGatewayPeerlet : public Peerlet {
public:
    struct Config {
        std::set<std::string> auth_tokens;
        std::size_t queue_capacity = 65536;
        std::size_t commit_batch = 256;
        TimeMs commit_period_ms = 20;
    };

    LogGatewayPeerlet(Config cfg, RecordStore& store);

    std::string_view name() const override { return "log-gateway"; }

    void start() override;
    void stop() override;
    bool handle_message(const Envelope& env) override;
    void handle_timer(TimerId id) override;

    // Drains the pending queue into the store, in commit_batch chunks.
    void flush();
    std::vector<LogRecord> query(const RecordStore::Filter& filter) const;

    std::uint64_t unauthorized() const { return unauthorized_; }
    std::uint64_t received() const { return received_; }
    std::uint64_t dropped_overflow() const { return dropped_overflow_; }
    std::uint64_t dropped_commit() const { return dropped_commit_; }
    const std::map<PeerId, std::set<std::string>>& schemas() const { return schemas_; }

private:
    void commit_chunk();

    Config cfg_;
    RecordStore& store_;
    std::deque<LogRecord> pending_;
    std::map<PeerId, std::uint64_t> last_batch_;
    std::map<PeerId, std::set<std::string>> schemas_;
    TimerId commit_timer_ = 0;
    std::uint64_t unauthorized_ = 0;
    std::uint64_t received_ = 0;
    std::uint64_t dropped_overflow_ = 0;
    std::uint64_t dropped_commit_ = 0;
};

} // namespace meshbed::mon
