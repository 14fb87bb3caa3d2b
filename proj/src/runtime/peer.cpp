#include "meshbed/runtime/peer.hpp"

#include <stdexcept>

#include "meshbed/runtime/runtime.hpp"

namespace meshbed {

Peer::Peer(PeerId id, NetworkAddress address, ExecutionMode mode, PeerletList peerlets,
           std::size_t queue_capacity, DropPolicy drop_policy)
    : id_(id),
      address_(std::move(address)),
      mode_(mode),
      peerlets_(std::move(peerlets)),
      inbound_(queue_capacity, drop_policy),
      outbound_(queue_capacity, drop_policy) {
    if (peerlets_.empty()) {
        throw std::invalid_argument("peer " + std::to_string(id) + ": no peerlets");
    }
}

void Peer::init_peerlets() {
    for (auto& p : peerlets_) {
        p->init(*this);
    }
}

void Peer::attach(RuntimeCore& runtime, Rng rng) {
    runtime_ = &runtime;
    rng_ = rng;
    init_peerlets();
}

void Peer::lifecycle_start() {
    if (state_ != PeerState::Init) {
        throw std::logic_error("peer " + std::to_string(id_) + ": start from non-INIT state");
    }
    state_ = PeerState::Running;
    for (auto& p : peerlets_) {
        p->start();
    }
}

void Peer::lifecycle_stop() {
    if (state_ != PeerState::Running) {
        return;
    }
    state_ = PeerState::Leaving;
    for (auto& p : peerlets_) {
        p->stop();
    }
    state_ = PeerState::Stopped;
    // Pending inbound traffic dies with the peer.
    while (inbound_.pop()) {
    }
}

void Peer::reset_peerlets(PeerletList peerlets) {
    if (state_ != PeerState::Stopped) {
        throw std::logic_error("peer " + std::to_string(id_) + ": reset while not stopped");
    }
    if (peerlets.empty()) {
        throw std::invalid_argument("peer " + std::to_string(id_) + ": no peerlets");
    }
    peerlets_ = std::move(peerlets);
    state_ = PeerState::Init;
    init_peerlets();
}

TimeMs Peer::now_ms() const {
    return runtime_->now_ms();
}

TimerId Peer::schedule_timer(TimeMs delay_ms) {
    if (state_ != PeerState::Running) {
        throw std::logic_error("peer " + std::to_string(id_) + ": timer on non-running peer");
    }
    if (delay_ms < 0) {
        throw std::invalid_argument("negative timer delay");
    }
    return runtime_->schedule_timer(*this, delay_ms, false, 0);
}

TimerId Peer::schedule_periodic(TimeMs period_ms) {
    if (state_ != PeerState::Running) {
        throw std::logic_error("peer " + std::to_string(id_) + ": timer on non-running peer");
    }
    if (period_ms <= 0) {
        throw std::invalid_argument("non-positive timer period");
    }
    return runtime_->schedule_timer(*this, period_ms, true, period_ms);
}

void Peer::cancel_timer(TimerId id) {
    runtime_->cancel_timer(*this, id);
}

SendReceipt Peer::send(const NetworkAddress& to, std::uint16_t msg_type, std::string body) {
    if (state_ != PeerState::Running && state_ != PeerState::Leaving) {
        throw std::logic_error("peer " + std::to_string(id_) + ": send from non-running peer");
    }
    Envelope env;
    env.msg_type = msg_type;
    env.sender = address_;
    env.recipient = to;
    env.seq = next_seq_++;
    env.body = std::move(body);
    return runtime_->send_from(*this, std::move(env));
}

QueueStats Peer::queue_stats() const {
    QueueStats s;
    s.in_len = inbound_.size();
    s.out_len = outbound_.size();
    s.dropped_count = inbound_.dropped() + outbound_.dropped();
    return s;
}

bool Peer::push_inbound(Envelope env, bool blocking) {
    if (state_ != PeerState::Running) {
        return false;
    }
    if (blocking) {
        return inbound_.push(std::move(env));
    }
    return inbound_.try_push(std::move(env));
}

bool Peer::process_inbound_one() {
    if (state_ != PeerState::Running) {
        return false;
    }
    auto env = inbound_.pop();
    if (!env) {
        return false;
    }
    ++delivered_;
    for (auto& p : peerlets_) {
        if (p->handle_message(*env)) {
            break;
        }
    }
    return true;
}

void Peer::drain_inbound() {
    while (process_inbound_one()) {
    }
}

void Peer::fire_timer(TimerId id) {
    if (state_ != PeerState::Running) {
        return;
    }
    for (auto& p : peerlets_) {
        p->handle_timer(id);
    }
}

} // namespace meshbed
