#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <queue>
#include <vector>

#include "meshbed/core/rng.hpp"
#include "meshbed/runtime/peer.hpp"
#include "meshbed/runtime/runtime.hpp"
#include "meshbed/runtime/trace.hpp"

namespace meshbed {

struct SimConfig {
    std::uint64_t seed = 1;
    TimeMs delivery_delay_ms = 1;
    std::size_t queue_capacity = 10000;
    DropPolicy drop_policy = DropPolicy::BlockSender;
    bool record_trace = true;
    // Long soaks keep the trace affordable by recording only low message
    // type codes (e.g. the bootstrap protocol) and skipping timer events.
    std::uint16_t trace_msg_type_max = 0xffff;
    bool trace_timers = true;
};

// Single-threaded discrete-event runtime with a virtual millisecond clock.
// Events are totally ordered by (timestamp, kind rank, source peer,
// sequence); deliveries rank before timers, control actions last. Identical
// seed and scenario give byte-identical traces.
class SimRuntime final : public RuntimeCore {
public:
    explicit SimRuntime(SimConfig cfg = {});

    // Registers a peer with address sim:<id>. The factory is kept so churn
    // scenarios can restart the peer with fresh peerlet state.
    Peer& add_peer(PeerId id, PeerletFactory factory);
    // Takes ownership of an externally built peer; rejects non-SIM peers.
    Peer& adopt_peer(std::unique_ptr<Peer> peer);

    Peer& peer(PeerId id);
    bool has_peer(PeerId id) const { return peers_.count(id) != 0; }
    std::vector<PeerId> peer_ids() const;

    void start_all();
    void start_peer(PeerId id);
    void stop_peer(PeerId id);
    void restart_peer(PeerId id); // stopped peer, fresh peerlets from factory

    // Runs every event with timestamp < until_ms (end-exclusive, so
    // until_ms = 0 performs no work).
    void run_until(TimeMs until_ms);
    // Runs until the event queue drains or until_ms is hit.
    void run_to_quiescence(TimeMs until_ms);
    bool step(); // one event; false when queue empty

    // Schedules a scenario-driver action; ordered after deliveries and
    // timers at the same timestamp.
    void at(TimeMs when_ms, std::function<void()> action);

    TimeMs virtual_now() const { return now_; }
    const EventTrace& trace() const { return trace_; }
    Rng& scenario_rng() { return scenario_rng_; }
    const SimConfig& config() const { return cfg_; }

    struct Counters {
        std::uint64_t sent = 0;
        std::uint64_t delivered = 0;
        std::uint64_t dropped = 0;
    };
    const Counters& counters() const { return counters_; }

    // RuntimeCore
    ExecutionMode mode() const override { return ExecutionMode::Sim; }
    TimeMs now_ms() const override { return now_; }
    TimerId schedule_timer(Peer& owner, TimeMs delay_ms, bool periodic,
                           TimeMs period_ms) override;
    void cancel_timer(Peer& owner, TimerId id) override;
    SendReceipt send_from(Peer& sender, Envelope env) override;

private:
    enum class EventKind : int { Delivery = 0, Timer = 1, Control = 2 };

    struct Event {
        TimeMs ts = 0;
        EventKind kind = EventKind::Delivery;
        PeerId src = 0;
        std::uint64_t seq = 0;
        PeerId recipient = 0;      // Delivery
        TimerId timer = 0;         // Timer
        std::size_t control_slot = 0; // Control

        bool operator>(const Event& o) const {
            if (ts != o.ts) return ts > o.ts;
            if (kind != o.kind) return static_cast<int>(kind) > static_cast<int>(o.kind);
            if (src != o.src) return src > o.src;
            return seq > o.seq;
        }
    };

    struct TimerRec {
        PeerId owner = 0;
        bool periodic = false;
        TimeMs period_ms = 0;
        bool cancelled = false;
    };

    struct PeerRec {
        std::unique_ptr<Peer> peer;
        PeerletFactory factory;
    };

    void dispatch(const Event& ev);
    void record_delivery(TimeMs ts, const Envelope& env, PeerId recipient);

    SimConfig cfg_;
    TimeMs now_ = 0;
    std::uint64_t next_event_seq_ = 1;
    TimerId next_timer_id_ = 1;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
    std::map<PeerId, PeerRec> peers_;
    std::map<TimerId, TimerRec> timers_;
    std::vector<std::function<void()>> control_actions_;
    EventTrace trace_;
    Rng scenario_rng_;
    Counters counters_;
};

// Convenience wrapper matching the one-shot simulation contract: starts all
// peers, runs to until_ms, returns the trace.
EventTrace run_simulation(SimRuntime& runtime, TimeMs until_ms);

} // namespace meshbed
