#include "meshbed/runtime/sim_runtime.hpp"

#include <stdexcept>

namespace meshbed {

SimRuntime::SimRuntime(SimConfig cfg) : cfg_(cfg), scenario_rng_(cfg.seed) {}

Peer& SimRuntime::add_peer(PeerId id, PeerletFactory factory) {
    if (peers_.count(id) != 0) {
        throw std::invalid_argument("duplicate peer id " + std::to_string(id));
    }
    auto peer = std::make_unique<Peer>(id, NetworkAddress::sim(id), ExecutionMode::Sim,
                                       factory(), cfg_.queue_capacity, cfg_.drop_policy);
    Peer& ref = *peer;
    ref.attach(*this, scenario_rng_.fork(id));
    peers_.emplace(id, PeerRec{std::move(peer), std::move(factory)});
    return ref;
}

Peer& SimRuntime::adopt_peer(std::unique_ptr<Peer> peer) {
    if (peer->mode() != ExecutionMode::Sim) {
        throw std::invalid_argument("peer " + std::to_string(peer->id()) +
                                    " is not in SIM mode");
    }
    if (peers_.count(peer->id()) != 0) {
        throw std::invalid_argument("duplicate peer id " + std::to_string(peer->id()));
    }
    Peer& ref = *peer;
    ref.attach(*this, scenario_rng_.fork(peer->id()));
    peers_.emplace(ref.id(), PeerRec{std::move(peer), PeerletFactory{}});
    return ref;
}

Peer& SimRuntime::peer(PeerId id) {
    auto it = peers_.find(id);
    if (it == peers_.end()) {
        throw std::out_of_range("unknown peer id " + std::to_string(id));
    }
    return *it->second.peer;
}

std::vector<PeerId> SimRuntime::peer_ids() const {
    std::vector<PeerId> out;
    out.reserve(peers_.size());
    for (const auto& [id, rec] : peers_) {
        out.push_back(id);
    }
    return out;
}

void SimRuntime::start_all() {
    for (auto& [id, rec] : peers_) {
        if (rec.peer->state() == PeerState::Init) {
            rec.peer->lifecycle_start();
        }
    }
}

void SimRuntime::start_peer(PeerId id) {
    peer(id).lifecycle_start();
}

void SimRuntime::stop_peer(PeerId id) {
    peer(id).lifecycle_stop();
}

void SimRuntime::restart_peer(PeerId id) {
    auto it = peers_.find(id);
    if (it == peers_.end()) {
        throw std::out_of_range("unknown peer id " + std::to_string(id));
    }
    if (!it->second.factory) {
        throw std::logic_error("peer " + std::to_string(id) + " has no peerlet factory");
    }
    it->second.peer->reset_peerlets(it->second.factory());
    it->second.peer->lifecycle_start();
}

TimerId SimRuntime::schedule_timer(Peer& owner, TimeMs delay_ms, bool periodic,
                                   TimeMs period_ms) {
    const TimerId id = next_timer_id_++;
    timers_[id] = TimerRec{owner.id(), periodic, period_ms, false};
    queue_.push(Event{now_ + delay_ms, EventKind::Timer, owner.id(), id, 0, id, 0});
    return id;
}

void SimRuntime::cancel_timer(Peer& owner, TimerId id) {
    auto it = timers_.find(id);
    if (it != timers_.end() && it->second.owner == owner.id()) {
        it->second.cancelled = true;
    }
}

SendReceipt SimRuntime::send_from(Peer& sender, Envelope env) {
    SendReceipt receipt;
    receipt.seq = env.seq;
    if (!env.recipient.is_sim()) {
        receipt.status = SendReceipt::Status::Failed;
        receipt.error = "non-SIM recipient " + env.recipient.to_string();
        return receipt;
    }
    const PeerId recipient = env.recipient.sim_id;
    if (!sender.outbound().try_push(std::move(env))) {
        if (cfg_.drop_policy == DropPolicy::BlockSender) {
            throw std::runtime_error("peer " + std::to_string(sender.id()) +
                                     ": outbound queue full in SIM (BLOCK_SENDER)");
        }
        receipt.status = SendReceipt::Status::Dropped;
        receipt.error = "outbound queue full";
        ++counters_.dropped;
        return receipt;
    }
    ++counters_.sent;
    queue_.push(Event{now_ + cfg_.delivery_delay_ms, EventKind::Delivery, sender.id(),
                      next_event_seq_++, recipient, 0, 0});
    return receipt;
}

void SimRuntime::at(TimeMs when_ms, std::function<void()> action) {
    control_actions_.push_back(std::move(action));
    queue_.push(Event{when_ms, EventKind::Control, 0, next_event_seq_++, 0, 0,
                      control_actions_.size() - 1});
}

void SimRuntime::record_delivery(TimeMs ts, const Envelope& env, PeerId recipient) {
    if (!cfg_.record_trace || env.msg_type > cfg_.trace_msg_type_max) {
        return;
    }
    std::string detail = "type=" + std::to_string(env.msg_type) +
                         " from=" + env.sender.to_string() +
                         " to=" + env.recipient.to_string() +
                         " seq=" + std::to_string(env.seq);
    trace_.record(ts, recipient, TraceEvent::Kind::Delivery, std::move(detail));
}

void SimRuntime::dispatch(const Event& ev) {
    switch (ev.kind) {
    case EventKind::Delivery: {
        auto src_it = peers_.find(ev.src);
        if (src_it == peers_.end()) {
            return;
        }
        auto env = src_it->second.peer->outbound().pop();
        if (!env) {
            return; // sender restarted and queue was cleared
        }
        auto dst_it = peers_.find(ev.recipient);
        if (dst_it == peers_.end()) {
            ++counters_.dropped;
            return;
        }
        Peer& dst = *dst_it->second.peer;
        record_delivery(ev.ts, *env, ev.recipient);
        if (dst.state() != PeerState::Running) {
            ++counters_.dropped;
            return;
        }
        if (!dst.push_inbound(std::move(*env))) {
            if (cfg_.drop_policy == DropPolicy::BlockSender) {
                throw std::runtime_error("peer " + std::to_string(dst.id()) +
                                         ": inbound queue full in SIM (BLOCK_SENDER)");
            }
            ++counters_.dropped;
            return;
        }
        ++counters_.delivered;
        dst.drain_inbound();
        return;
    }
    case EventKind::Timer: {
        auto it = timers_.find(ev.timer);
        if (it == timers_.end() || it->second.cancelled) {
            timers_.erase(ev.timer);
            return;
        }
        auto peer_it = peers_.find(it->second.owner);
        if (peer_it == peers_.end() ||
            peer_it->second.peer->state() != PeerState::Running) {
            timers_.erase(it);
            return;
        }
        if (cfg_.record_trace && cfg_.trace_timers) {
            trace_.record(ev.ts, it->second.owner, TraceEvent::Kind::Timer,
                          "timer=" + std::to_string(ev.timer));
        }
        if (it->second.periodic) {
            queue_.push(Event{ev.ts + it->second.period_ms, EventKind::Timer,
                              it->second.owner, ev.timer, 0, ev.timer, 0});
        } else {
            timers_.erase(it);
        }
        peer_it->second.peer->fire_timer(ev.timer);
        return;
    }
    case EventKind::Control:
        control_actions_[ev.control_slot]();
        return;
    }
}

bool SimRuntime::step() {
    if (queue_.empty()) {
        return false;
    }
    const Event ev = queue_.top();
    queue_.pop();
    now_ = ev.ts;
    dispatch(ev);
    return true;
}

void SimRuntime::run_until(TimeMs until_ms) {
    while (!queue_.empty() && queue_.top().ts < until_ms) {
        step();
    }
    if (now_ < until_ms) {
        now_ = until_ms;
    }
}

void SimRuntime::run_to_quiescence(TimeMs until_ms) {
    while (!queue_.empty() && queue_.top().ts < until_ms) {
        step();
    }
}

EventTrace run_simulation(SimRuntime& runtime, TimeMs until_ms) {
    runtime.start_all();
    runtime.run_until(until_ms);
    return runtime.trace();
}

} // namespace meshbed
