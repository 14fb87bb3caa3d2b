#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "meshbed/core/ids.hpp"
#include "meshbed/core/rng.hpp"
#include "meshbed/net/queue.hpp"
#include "meshbed/runtime/peerlet.hpp"

namespace meshbed {

class RuntimeCore;

struct SendReceipt {
    enum class Status { Sent, Dropped, Failed };
    Status status = Status::Sent;
    std::uint64_t seq = 0;
    std::string error;

    bool ok() const { return status == Status::Sent; }
};

// Agent container. Owns the peerlets and the two message queues; time,
// timers and transport are delegated to the hosting runtime so the same
// peerlet code runs in SIM and LIVE.
class Peer {
public:
    Peer(PeerId id, NetworkAddress address, ExecutionMode mode, PeerletList peerlets,
         std::size_t queue_capacity, DropPolicy drop_policy);

    Peer(const Peer&) = delete;
    Peer& operator=(const Peer&) = delete;

    PeerId id() const { return id_; }
    const NetworkAddress& address() const { return address_; }
    ExecutionMode mode() const { return mode_; }
    PeerState state() const { return state_.load(); }

    // --- peerlet-facing API -------------------------------------------------
    TimeMs now_ms() const;
    TimerId schedule_timer(TimeMs delay_ms);
    TimerId schedule_periodic(TimeMs period_ms);
    void cancel_timer(TimerId id);
    SendReceipt send(const NetworkAddress& to, std::uint16_t msg_type, std::string body);
    Rng& rng() { return rng_; }
    QueueStats queue_stats() const;

    template <typename T>
    T* find_peerlet() {
        for (auto& p : peerlets_) {
            if (auto* t = dynamic_cast<T*>(p.get())) {
                return t;
            }
        }
        return nullptr;
    }

    // --- runtime-facing API -------------------------------------------------
    void attach(RuntimeCore& runtime, Rng rng);
    void lifecycle_start();
    void lifecycle_stop();
    void reset_peerlets(PeerletList peerlets); // restart support; keeps id/address/seq

    // Inbound path, split so LIVE reader threads can enqueue while the
    // peer's executor dispatches. Returns false when the envelope was not
    // accepted (peer not running, or queue full under DropNewest).
    bool push_inbound(Envelope env, bool blocking = false);
    bool process_inbound_one();
    void drain_inbound();
    void fire_timer(TimerId id);

    MessageQueue& outbound() { return outbound_; }
    MessageQueue& inbound() { return inbound_; }

    std::uint64_t messages_delivered() const { return delivered_; }

private:
    void init_peerlets();

    const PeerId id_;
    const NetworkAddress address_;
    const ExecutionMode mode_;
    // Read from transport threads in LIVE mode; mutated on the executor.
    std::atomic<PeerState> state_{PeerState::Init};
    PeerletList peerlets_;
    RuntimeCore* runtime_ = nullptr;
    Rng rng_{0};
    MessageQueue inbound_;
    MessageQueue outbound_;
    std::uint64_t next_seq_ = 1;
    std::uint64_t delivered_ = 0;
};

} // namespace meshbed
