#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <string>
#include <thread>
#include <vector>

#include "meshbed/core/rng.hpp"
#include "meshbed/net/frame.hpp"
#include "meshbed/runtime/peer.hpp"
#include "meshbed/runtime/runtime.hpp"

namespace meshbed {

struct LiveConfig {
    std::uint64_t seed = 1;
    std::string host = "127.0.0.1";
    std::size_t queue_capacity = 10000;
    DropPolicy drop_policy = DropPolicy::DropNewest;
    int connect_attempts = 3;
    TimeMs connect_backoff_ms = 200;
};

// Wall-clock runtime: one executor thread per peer (serialized callbacks,
// peers in parallel) and a single poll() reactor owning every socket. All
// traffic runs over real TCP with the shared frame codec, one lazily opened
// long-lived connection per directed (sender, recipient) pair.
class LiveRuntime final : public RuntimeCore {
public:
    explicit LiveRuntime(LiveConfig cfg = {});
    ~LiveRuntime() override;

    LiveRuntime(const LiveRuntime&) = delete;
    LiveRuntime& operator=(const LiveRuntime&) = delete;

    // Binds the peer's listener on (cfg.host, port) immediately.
    Peer& add_peer(PeerId id, std::uint16_t port, PeerletFactory factory);

    void start_all();
    void stop_all();
    void start_peer(PeerId id);
    void stop_peer(PeerId id);
    bool all_stopped() const;

    Peer& peer(PeerId id);

    // RuntimeCore
    ExecutionMode mode() const override { return ExecutionMode::Live; }
    TimeMs now_ms() const override;
    TimerId schedule_timer(Peer& owner, TimeMs delay_ms, bool periodic,
                           TimeMs period_ms) override;
    void cancel_timer(Peer& owner, TimerId id) override;
    SendReceipt send_from(Peer& sender, Envelope env) override;

    std::uint64_t failed_sends() const { return failed_sends_.load(); }

private:
    struct Executor {
        struct TimerRec {
            TimeMs deadline = 0;
            TimeMs period_ms = 0;
            bool periodic = false;
            bool cancelled = false;
        };

        std::thread thread;
        std::mutex mu;
        std::condition_variable cv;
        std::deque<std::function<void()>> tasks;
        std::map<TimerId, TimerRec> timers;
        bool stopping = false;
    };

    struct PeerRec {
        std::unique_ptr<Peer> peer;
        PeerletFactory factory;
        std::unique_ptr<Executor> executor;
        int listen_fd = -1;
        std::uint16_t port = 0;
    };

    struct InConn {
        int fd = -1;
        FrameDecoder decoder;
    };

    struct OutConn {
        int fd = -1;
        std::string write_buffer;
        bool failed = false;
        std::chrono::steady_clock::time_point failed_until{};
    };

    void executor_loop(PeerRec& rec);
    void reactor_loop();
    void wake_reactor();
    void post(PeerRec& rec, std::function<void()> task);
    void route_inbound(Envelope env);
    int connect_with_retries(const std::string& host, std::uint16_t port);
    PeerRec* find_by_port(std::uint16_t port);

    LiveConfig cfg_;
    std::chrono::steady_clock::time_point t0_;
    Rng seed_rng_;

    mutable std::mutex peers_mu_;
    std::map<PeerId, std::unique_ptr<PeerRec>> peers_;

    std::mutex net_mu_;
    std::map<int, InConn> in_conns_;
    std::map<std::string, OutConn> out_conns_; // key: sender id | recipient addr
    std::vector<Envelope> pending_outbound_;   // drained by the reactor
    std::deque<Envelope> inbound_retry_;       // BLOCK_SENDER backpressure

    std::thread reactor_;
    std::atomic<bool> running_{false};
    std::atomic<bool> stopping_{false};
    std::atomic<std::uint64_t> next_timer_id_{1};
    std::atomic<std::uint64_t> failed_sends_{0};
    int wake_pipe_[2] = {-1, -1};
};

} // namespace meshbed
