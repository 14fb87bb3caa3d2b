#include "meshbed/bootstrap/service_agent.hpp"

#include "meshbed/monitor/peerlet.hpp"

namespace meshbed::boot {

ServiceAgentPeerlet::ServiceAgentPeerlet(std::string serv_info)
    : serv_info_(std::move(serv_info)) {}

bool ServiceAgentPeerlet::absorb_ready(const ReadyMsg& msg) {
    members_.clear();
    ordinal_.reset();
    const std::string self = peer_->address().to_string();
    constexpr std::string_view member_prefix = "member:";
    for (const auto& [k, v] : msg.serv_md.params) {
        if (std::string_view(k).substr(0, member_prefix.size()) == member_prefix) {
            const auto ord = parse_u64(std::string_view(k).substr(member_prefix.size()));
            const auto addr = NetworkAddress::parse(v);
            if (!ord || !addr) {
                return false;
            }
            members_[*ord] = *addr;
            if (v == self) {
                ordinal_ = *ord;
            }
        }
    }
    const auto dev = msg.serv_md.param("device:" + self);
    if (dev) {
        device_ = NetworkAddress::parse(*dev);
    }
    current_md_ = msg.serv_md;
    return ordinal_.has_value();
}

bool ServiceAgentPeerlet::handle_message(const Envelope& env) {
    switch (env.msg_type) {
    case msg::kReady: {
        const auto msg_in = parse_ready(env.body);
        if (!msg_in || msg_in->serv_info != serv_info_) {
            mon::log_via(*peer_, mon::LogKind::Event, "ready_rejected",
                         msg_in ? msg_in->serv_info : "unparseable");
            return true;
        }
        gateway_ = env.sender;
        running_ = false;
        if (!absorb_ready(*msg_in)) {
            mon::log_via(*peer_, mon::LogKind::Event, "ready_invalid_metadata", "");
            return true;
        }
        if (on_ready(*msg_in)) {
            peer_->send(*gateway_, msg::kAgnReady,
                        agn_ready_body(peer_->address(), serv_info_));
        }
        return true;
    }
    case msg::kRunServ: {
        const auto serv = parse_run_serv(env.body);
        if (!serv || *serv != serv_info_) {
            return true;
        }
        if (running_) {
            // Duplicate run command (unspecified upstream): log and ignore.
            mon::log_via(*peer_, mon::LogKind::Event, "duplicate_run_serv", "");
            return true;
        }
        running_ = true;
        on_run();
        return true;
    }
    case msg::kSensing: {
        const auto msg_in = parse_sensing(env.body);
        if (!msg_in || msg_in->serv_info != serv_info_) {
            return true;
        }
        if (msg_in->payload == "cmd:leave") {
            on_device_leave();
            return true;
        }
        if (msg_in->payload == "cmd:join") {
            on_device_join();
            return true;
        }
        on_sensing(*msg_in, env.sender);
        return true;
    }
    default:
        return false;
    }
}

void ServiceAgentPeerlet::send_to_device(std::uint16_t type, const std::string& body) {
    if (device_) {
        peer_->send(*device_, type, body);
    }
}

void ServiceAgentPeerlet::send_completion(const std::string& note) {
    if (gateway_) {
        peer_->send(*gateway_, msg::kActuation, actuation_body(serv_info_, note));
    }
}

void ServiceAgentPeerlet::request_sensing(const std::string& what) {
    send_to_device(msg::kSensing, sensing_body(serv_info_, "req:" + what));
}

} // namespace meshbed::boot
