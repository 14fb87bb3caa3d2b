#include "meshbed/dias/agent.hpp"

#include <algorithm>

#include "meshbed/core/encoding.hpp"
#include "meshbed/monitor/peerlet.hpp"

namespace meshbed::dias {

DiasAgentPeerlet::DiasAgentPeerlet(DiasConfig cfg)
    : boot::ServiceAgentPeerlet(cfg.serv_info),
      cfg_(cfg),
      consumer_(cfg.bloom_m, cfg.bloom_h) {
    view_.capacity = cfg_.view_size;
}

bool DiasAgentPeerlet::on_ready(const boot::ReadyMsg&) {
    // Bootstrap contacts: the next few members on the ordinal ring.
    view_.entries.clear();
    if (!ordinal_ || members_.empty()) {
        return false;
    }
    std::vector<std::uint64_t> ordinals;
    for (const auto& [ord, addr] : members_) {
        ordinals.push_back(ord);
    }
    const auto self_it = std::find(ordinals.begin(), ordinals.end(), *ordinal_);
    const std::size_t self_pos = static_cast<std::size_t>(self_it - ordinals.begin());
    for (std::size_t i = 1; i <= cfg_.bootstrap_degree && i < ordinals.size(); ++i) {
        const std::uint64_t neighbor = ordinals[(self_pos + i) % ordinals.size()];
        view_.entries.push_back(PeerView::Entry{members_.at(neighbor), 0});
    }
    return true;
}

void DiasAgentPeerlet::on_run() {
    request_sensing("stream");
    if (gossip_timer_ == 0) {
        gossip_timer_ = peer_->schedule_periodic(cfg_.gossip_period_ms);
        dissemination_timer_ = peer_->schedule_periodic(cfg_.dissemination_period_ms);
    }
}

void DiasAgentPeerlet::apply_tick(const FieldRecord& rec) {
    const auto raw = rec.get_f64("raw");
    const auto tick = rec.get_u64("tick");
    const auto states_text = rec.get("states");
    if (!raw || !tick || !states_text) {
        return;
    }
    PossibleStates states;
    for (const auto& piece : split(*states_text, ',')) {
        const auto v = parse_double(piece);
        if (!v) {
            return;
        }
        states.states.push_back(*v);
    }
    try {
        states.validate();
    } catch (const std::exception& e) {
        mon::log_via(*peer_, mon::LogKind::Event, "bad_states", e.what());
        return;
    }
    states_ = states;
    last_tick_ = *tick;
    mon::log_via(*peer_, mon::LogKind::Service, "raw",
                 std::to_string(*tick) + "," + format_double(*raw));

    const std::size_t index = summarize(*raw, states_);
    const double value = states_.states[index];
    const bool changed = !selected_ || selected_->value != value ||
                         selected_->state_index != index || rebump_version_;
    if (!changed) {
        return;
    }
    previous_ = selected_;
    SelectedState next;
    next.supplier = peer_->id();
    next.state_index = index;
    next.value = value;
    next.version = *tick; // device tick counter: survives agent restarts
    selected_ = next;
    rebump_version_ = false;
    mon::log_via(*peer_, mon::LogKind::Service, "sel",
                 std::to_string(*tick) + "," + std::to_string(index) + "," +
                     format_double(value));
}

SessionMessage DiasAgentPeerlet::current_session() const {
    SessionMessage msg;
    msg.supplier = selected_->supplier;
    msg.version = selected_->version;
    msg.state_index = selected_->state_index;
    msg.value = selected_->value;
    if (previous_) {
        msg.prev_version = previous_->version;
        msg.prev_value = previous_->value;
    }
    return msg;
}

void DiasAgentPeerlet::disseminate() {
    if (dormant_ || !selected_) {
        return;
    }
    const SessionMessage session = current_session();
    // Own consumer first, then every consumer currently in the view.
    consumer_.apply_session(session);
    const std::string body = session.encode();
    for (const auto& entry : view_.entries) {
        peer_->send(entry.address, msg::kDiasSession, body);
        ++sessions_sent_;
    }

    const AggregateEstimate est = consumer_.estimate(peer_->now_ms());
    mon::log_via(*peer_, mon::LogKind::Service, "est",
                 format_double(est.sum) + "," + std::to_string(est.count));
    std::string est_body = format_double(est.sum) + ";" + std::to_string(est.count) + ";" +
                           format_double(est.min) + ";" + format_double(est.max) + ";" +
                           std::to_string(est.as_of);
    for (const auto& entry : view_.entries) {
        peer_->send(entry.address, msg::kDiasEstimate, est_body);
    }
    send_to_device(msg::kActuation,
                   boot::actuation_body(serv_info_, "estimate:" + est_body));
}

void DiasAgentPeerlet::push_session_to_discovered(
    const std::vector<PeerView::Entry>& before) {
    if (dormant_ || !selected_) {
        return;
    }
    std::string session;
    for (const auto& entry : view_.entries) {
        bool known = false;
        for (const auto& old : before) {
            if (old.address == entry.address) {
                known = true;
                break;
            }
        }
        if (known) {
            continue;
        }
        // Newly discovered consumer: send the current state right away
        // instead of waiting for the next dissemination period.
        if (session.empty()) {
            session = current_session().encode();
        }
        peer_->send(entry.address, msg::kDiasSession, session);
        ++sessions_sent_;
    }
}

void DiasAgentPeerlet::gossip_round() {
    if (dormant_) {
        return;
    }
    view_.age_all();
    const auto partner = view_.oldest();
    if (!partner) {
        return; // empty view and no bootstrap contact
    }
    peer_->send(*partner, msg::kGossipRequest,
                encode_view_entries(view_.exchange_half(peer_->address())));
}

bool DiasAgentPeerlet::handle_message(const Envelope& env) {
    switch (env.msg_type) {
    case msg::kGossipRequest: {
        if (dormant_) {
            return true;
        }
        const auto incoming = decode_view_entries(env.body);
        if (!incoming) {
            return true;
        }
        // Reply with the pre-merge half, then absorb the exchange.
        peer_->send(env.sender, msg::kGossipReply,
                    encode_view_entries(view_.exchange_half(peer_->address())));
        const std::vector<PeerView::Entry> before = view_.entries;
        view_.merge(*incoming, peer_->address());
        push_session_to_discovered(before);
        return true;
    }
    case msg::kGossipReply: {
        if (dormant_) {
            return true;
        }
        const auto incoming = decode_view_entries(env.body);
        if (incoming) {
            const std::vector<PeerView::Entry> before = view_.entries;
            view_.merge(*incoming, peer_->address());
            push_session_to_discovered(before);
        }
        return true;
    }
    case msg::kDiasSession: {
        if (dormant_) {
            return true;
        }
        const auto session = SessionMessage::decode(env.body);
        if (!session) {
            return true;
        }
        const SessionOutcome outcome = consumer_.apply_session(*session);
        if (outcome == SessionOutcome::Rejected) {
            mon::log_via(*peer_, mon::LogKind::Event, "session_rejected",
                         std::to_string(session->supplier) + " v" +
                             std::to_string(session->version));
        }
        peer_->send(env.sender, msg::kDiasSessionAck,
                    std::string(session_outcome_name(outcome)) + ";" +
                        std::to_string(session->supplier) + ";" +
                        std::to_string(session->version));
        return true;
    }
    case msg::kDiasSessionAck:
        ++sessions_acked_;
        return true;
    case msg::kDiasEstimate:
        ++estimates_received_;
        return true;
    case msg::kDiasLeave: {
        if (dormant_) {
            return true;
        }
        const auto parts = split(env.body, ';');
        if (parts.size() != 2) {
            return true;
        }
        const auto supplier = parse_u64(parts[0]);
        const auto version = parse_u64(parts[1]);
        if (!supplier || !version) {
            return true;
        }
        if (!consumer_.handle_leave(*supplier, *version)) {
            mon::log_via(*peer_, mon::LogKind::Event, "leave_unknown",
                         std::to_string(*supplier));
        }
        return true;
    }
    default:
        return boot::ServiceAgentPeerlet::handle_message(env);
    }
}

void DiasAgentPeerlet::handle_timer(TimerId id) {
    if (!running_) {
        return;
    }
    if (id == gossip_timer_) {
        gossip_round();
    } else if (id == dissemination_timer_) {
        disseminate();
    }
}

void DiasAgentPeerlet::on_sensing(const boot::DataMsg& msg, const NetworkAddress&) {
    if (dormant_) {
        return;
    }
    const auto rec = FieldRecord::decode(msg.payload);
    if (rec && rec->has("raw")) {
        apply_tick(*rec);
    }
}

void DiasAgentPeerlet::on_device_leave() {
    if (dormant_) {
        return;
    }
    dormant_ = true;
    // Graceful leave: tell the consumers we know about.
    if (selected_) {
        const std::string body = std::to_string(peer_->id()) + ";" +
                                 std::to_string(selected_->version);
        for (const auto& entry : view_.entries) {
            peer_->send(entry.address, msg::kDiasLeave, body);
        }
    }
    mon::log_via(*peer_, mon::LogKind::Event, "dias_leave", std::to_string(peer_->id()));
}

void DiasAgentPeerlet::on_device_join() {
    if (!dormant_) {
        return;
    }
    dormant_ = false;
    rebump_version_ = true; // next summarize re-announces with a fresh version
    request_sensing("stream");
    mon::log_via(*peer_, mon::LogKind::Event, "dias_join", std::to_string(peer_->id()));
}

} // namespace meshbed::dias
