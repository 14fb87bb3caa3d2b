#include "meshbed/bootstrap/app_agent.hpp"

#include "meshbed/monitor/peerlet.hpp"

namespace meshbed::boot {

AppAgentPeerlet::AppAgentPeerlet(Config cfg, std::unique_ptr<DeviceModel> device)
    : cfg_(std::move(cfg)), device_(std::move(device)) {}

void AppAgentPeerlet::register_with_gateway() {
    if (!gateway_) {
        return;
    }
    DeviceRegistration reg{peer_->address(), cfg_.dev_info, cfg_.serv_info};
    peer_->send(*gateway_, msg::kRegDev, reg_dev_body(reg));
}

bool AppAgentPeerlet::handle_message(const Envelope& env) {
    switch (env.msg_type) {
    case msg::kBroadcast: {
        const auto msg = parse_broadcast(env.body);
        if (!msg || msg->serv_info != cfg_.serv_info) {
            return false;
        }
        gateway_ = msg->gw_addr;
        if (online_) {
            register_with_gateway();
        }
        return true;
    }
    case msg::kAsgnAgn: {
        const auto msg = parse_asgn_agn(env.body);
        if (!msg) {
            return true;
        }
        service_agent_ = msg->agn_addr;
        mon::log_via(*peer_, mon::LogKind::Event, "assigned", msg->agn_addr.to_string());
        return true;
    }
    case msg::kSensing: {
        // Service-side sensing requests carry "req:<what>".
        const auto msg = parse_sensing(env.body);
        if (!msg || msg->serv_info != cfg_.serv_info || !online_) {
            return true;
        }
        constexpr std::string_view req = "req:";
        if (msg->payload.size() >= req.size() &&
            std::string_view(msg->payload).substr(0, req.size()) == req) {
            const std::string_view what = std::string_view(msg->payload).substr(req.size());
            const std::string reply = device_->sense(what, peer_->now_ms(), peer_->rng());
            peer_->send(env.sender, msg::kSensing, sensing_body(cfg_.serv_info, reply));
            if (what == "stream" && !streaming_) {
                streaming_ = true;
                arm_tick();
            }
        }
        return true;
    }
    case msg::kActuation: {
        const auto msg = parse_actuation(env.body);
        if (!msg || msg->serv_info != cfg_.serv_info) {
            return true;
        }
        ++actuations_;
        last_actuation_ = msg->payload;
        device_->actuate(msg->payload);
        mon::log_via(*peer_, mon::LogKind::Event, "actuation", msg->payload);
        return true;
    }
    case msg::kChangeCommand: {
        const auto rec = FieldRecord::decode(env.body);
        if (rec) {
            apply_command(*rec);
        }
        return true;
    }
    case msg::kOperatorNotice:
        return true; // registration rejections etc.; nothing to act on
    default:
        return false;
    }
}

void AppAgentPeerlet::apply_command(const FieldRecord& rec) {
    const auto cmd = rec.get("cmd");
    if (!cmd) {
        return;
    }
    mon::log_via(*peer_, mon::LogKind::Event, "command", *cmd);
    if (*cmd == "leave") {
        if (!online_) {
            return;
        }
        online_ = false;
        streaming_ = false;
        if (tick_timer_ != 0) {
            peer_->cancel_timer(tick_timer_);
            tick_timer_ = 0;
        }
        if (service_agent_) {
            peer_->send(*service_agent_, msg::kSensing,
                        sensing_body(cfg_.serv_info, "cmd:leave"));
        }
        if (gateway_) {
            peer_->send(*gateway_, msg::kDeregDev,
                        dereg_dev_body(peer_->address(), cfg_.serv_info));
        }
        return;
    }
    if (*cmd == "join") {
        if (online_) {
            return;
        }
        online_ = true;
        register_with_gateway();
        if (service_agent_) {
            peer_->send(*service_agent_, msg::kSensing,
                        sensing_body(cfg_.serv_info, "cmd:join"));
        }
        return;
    }
    // Device-specific change; the device may adjust its tick period.
    device_->command(*cmd, rec, peer_->now_ms(), peer_->rng());
    if (streaming_ && device_->tick_period_ms() != tick_period_) {
        arm_tick();
    }
}

void AppAgentPeerlet::arm_tick() {
    if (tick_timer_ != 0) {
        peer_->cancel_timer(tick_timer_);
        tick_timer_ = 0;
    }
    tick_period_ = device_->tick_period_ms();
    if (tick_period_ > 0 && online_) {
        tick_timer_ = peer_->schedule_periodic(tick_period_);
    }
}

void AppAgentPeerlet::handle_timer(TimerId id) {
    if (id != tick_timer_ || !online_ || !service_agent_) {
        return;
    }
    const std::string payload = device_->tick(peer_->now_ms(), peer_->rng());
    if (!payload.empty()) {
        peer_->send(*service_agent_, msg::kSensing, sensing_body(cfg_.serv_info, payload));
    }
}

} // namespace meshbed::boot
