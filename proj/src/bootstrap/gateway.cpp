#include "meshbed/bootstrap/gateway.hpp"

#include <stdexcept>

#include "meshbed/monitor/peerlet.hpp"

namespace meshbed::boot {

std::string_view phase_name(GatewayPhase phase) {
    switch (phase) {
    case GatewayPhase::Idle: return "IDLE";
    case GatewayPhase::Announced: return "ANNOUNCED";
    case GatewayPhase::Assigning: return "ASSIGNING";
    case GatewayPhase::Preparing: return "PREPARING";
    case GatewayPhase::Running: return "RUNNING";
    case GatewayPhase::Done: return "DONE";
    }
    return "?";
}

GatewayPeerlet::GatewayPeerlet(Config cfg) : cfg_(std::move(cfg)) {}

void GatewayPeerlet::start() {
    if (cfg_.auto_announce) {
        announce();
    }
}

void GatewayPeerlet::announce() {
    if (phase_ != GatewayPhase::Idle) {
        throw std::logic_error("announce in phase " + std::string(phase_name(phase_)));
    }
    const std::string body = broadcast_body(peer_->address(), cfg_.serv_info);
    for (const auto& agent : cfg_.app_agents) {
        peer_->send(agent, msg::kBroadcast, body);
    }
    phase_ = GatewayPhase::Announced;
}

GatewayPeerlet::Binding* GatewayPeerlet::find_by_device(const NetworkAddress& dev_addr) {
    for (auto& b : bindings_) {
        if (b.dev_addr == dev_addr) {
            return &b;
        }
    }
    return nullptr;
}

std::vector<std::size_t> GatewayPeerlet::active_ordinals() const {
    std::vector<std::size_t> out;
    for (const auto& b : bindings_) {
        if (b.active) {
            out.push_back(b.ordinal);
        }
    }
    return out;
}

bool GatewayPeerlet::handle_message(const Envelope& env) {
    switch (env.msg_type) {
    case msg::kRegDev:
        handle_reg_dev(env);
        return true;
    case msg::kDeregDev:
        handle_dereg_dev(env);
        return true;
    case msg::kServReq:
        handle_serv_req(env);
        return true;
    case msg::kAgnReady:
        handle_agn_ready(env);
        return true;
    case msg::kActuation:
        // Completion signal from the service; the body stays opaque.
        handle_completion(env);
        return true;
    case msg::kSensing:
        // Not a gateway concern; never parsed.
        mon::log_via(*peer_, mon::LogKind::Event, "gateway_ignored_sensing", "");
        return true;
    default:
        return false;
    }
}

void GatewayPeerlet::handle_reg_dev(const Envelope& env) {
    const auto reg = parse_reg_dev(env.body);
    if (!reg || reg->serv_info != cfg_.serv_info) {
        ++rejected_registrations_;
        return;
    }
    if (Binding* existing = find_by_device(reg->dev_addr)) {
        // Idempotent: same device gets the same agent; a re-registration
        // after a leave re-activates the binding (churn rejoin).
        existing->active = true;
        peer_->send(reg->dev_addr, msg::kAsgnAgn,
                    asgn_agn_body(cfg_.agent_pool[existing->ordinal]));
        return;
    }
    if (phase_ != GatewayPhase::Announced && phase_ != GatewayPhase::Assigning) {
        ++rejected_registrations_;
        peer_->send(reg->dev_addr, msg::kOperatorNotice,
                    operator_notice_body(cfg_.serv_info, "rejected",
                                         "registration in phase " +
                                             std::string(phase_name(phase_))));
        return;
    }

    // Known devices map to their own pool index so the pairing does not
    // depend on registration arrival order; latecomers take the first free
    // slot.
    std::size_t ordinal = cfg_.agent_pool.size();
    for (std::size_t i = 0; i < cfg_.app_agents.size(); ++i) {
        if (cfg_.app_agents[i] == reg->dev_addr && i < cfg_.agent_pool.size() &&
            bound_ordinals_.count(i) == 0) {
            ordinal = i;
            break;
        }
    }
    if (ordinal == cfg_.agent_pool.size()) {
        for (std::size_t i = 0; i < cfg_.agent_pool.size(); ++i) {
            if (bound_ordinals_.count(i) == 0) {
                ordinal = i;
                break;
            }
        }
    }
    if (ordinal == cfg_.agent_pool.size()) {
        ++rejected_registrations_;
        peer_->send(reg->dev_addr, msg::kOperatorNotice,
                    operator_notice_body(cfg_.serv_info, "rejected", "capacity"));
        return;
    }
    bound_ordinals_.insert(ordinal);
    bindings_.push_back(Binding{reg->dev_addr, ordinal, true});
    if (phase_ == GatewayPhase::Announced) {
        phase_ = GatewayPhase::Assigning;
    }
    peer_->send(reg->dev_addr, msg::kAsgnAgn, asgn_agn_body(cfg_.agent_pool[ordinal]));
}

void GatewayPeerlet::handle_dereg_dev(const Envelope& env) {
    const auto msg = parse_dereg_dev(env.body);
    if (!msg || msg->serv_info != cfg_.serv_info) {
        return;
    }
    if (Binding* binding = find_by_device(msg->dev_addr)) {
        binding->active = false;
        mon::log_via(*peer_, mon::LogKind::Event, "device_left", msg->dev_addr.to_string());
    }
}

void GatewayPeerlet::handle_serv_req(const Envelope& env) {
    const auto req = parse_serv_req(env.body);
    if (!req || req->serv_info != cfg_.serv_info) {
        notify_operator("rejected", "unknown service");
        return;
    }
    if (phase_ != GatewayPhase::Assigning && phase_ != GatewayPhase::Done) {
        notify_operator("rejected",
                        "service request in phase " + std::string(phase_name(phase_)));
        return;
    }
    const auto members = active_ordinals();
    if (members.size() < req->serv_md.agent_count) {
        notify_operator("rejected", "only " + std::to_string(members.size()) +
                                        " of " + std::to_string(req->serv_md.agent_count) +
                                        " agents assigned");
        return;
    }

    pending_service_ = *req;
    run_members_ = members;
    ServiceMetadata md = req->serv_md;
    for (const std::size_t ordinal : members) {
        md.set_param("member:" + std::to_string(ordinal),
                     cfg_.agent_pool[ordinal].to_string());
    }
    for (const auto& b : bindings_) {
        md.set_param("device:" + cfg_.agent_pool[b.ordinal].to_string(),
                     b.dev_addr.to_string());
    }

    ready_pending_.clear();
    const std::string body = ready_body(cfg_.serv_info, md);
    for (const std::size_t ordinal : members) {
        ready_pending_.insert(cfg_.agent_pool[ordinal].to_string());
        peer_->send(cfg_.agent_pool[ordinal], msg::kReady, body);
    }
    phase_ = GatewayPhase::Preparing;
    ready_timeout_timer_ = peer_->schedule_timer(cfg_.ready_timeout_ms);
}

void GatewayPeerlet::handle_agn_ready(const Envelope& env) {
    const auto msg = parse_agn_ready(env.body);
    if (!msg || msg->serv_info != cfg_.serv_info) {
        ++ignored_ready_replies_;
        mon::log_via(*peer_, mon::LogKind::Event, "ready_ignored",
                     msg ? msg->serv_info : "unparseable");
        return;
    }
    if (phase_ != GatewayPhase::Preparing) {
        ++ignored_ready_replies_;
        return;
    }
    ready_pending_.erase(msg->agn_addr.to_string());
    if (!ready_pending_.empty()) {
        return;
    }
    peer_->cancel_timer(ready_timeout_timer_);
    ready_timeout_timer_ = 0;
    const std::string body = run_serv_body(cfg_.serv_info);
    for (const std::size_t ordinal : run_members_) {
        peer_->send(cfg_.agent_pool[ordinal], msg::kRunServ, body);
    }
    phase_ = GatewayPhase::Running;
    notify_operator("running", "");
}

void GatewayPeerlet::handle_timer(TimerId id) {
    if (id != ready_timeout_timer_ || phase_ != GatewayPhase::Preparing) {
        return;
    }
    ready_timeout_timer_ = 0;
    ++aborted_requests_;
    std::string missing;
    for (const auto& addr : ready_pending_) {
        if (!missing.empty()) {
            missing += ' ';
        }
        missing += addr;
    }
    ready_pending_.clear();
    pending_service_.reset();
    phase_ = GatewayPhase::Assigning;
    mon::log_via(*peer_, mon::LogKind::Event, "readiness_timeout", missing);
    notify_operator("aborted", "readiness timeout: " + missing);
}

void GatewayPeerlet::handle_completion(const Envelope& env) {
    (void)env; // opaque by contract
    if (phase_ != GatewayPhase::Running) {
        return;
    }
    phase_ = GatewayPhase::Done;
    ++completed_runs_;
    mon::log_via(*peer_, mon::LogKind::Event, "service_done", cfg_.serv_info);
    notify_operator("done", "");
}

void GatewayPeerlet::notify_operator(const std::string& status, const std::string& detail) {
    peer_->send(cfg_.operator_addr, msg::kOperatorNotice,
                operator_notice_body(cfg_.serv_info, status, detail));
}

} // namespace meshbed::boot
