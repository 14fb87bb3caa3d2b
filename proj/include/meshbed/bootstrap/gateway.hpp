#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "meshbed/bootstrap/messages.hpp"
#include "meshbed/runtime/peer.hpp"
#include "meshbed/runtime/peerlet.hpp"

namespace meshbed::boot {

enum class GatewayPhase { Idle, Announced, Assigning, Preparing, Running, Done };

std::string_view phase_name(GatewayPhase phase);

// Bootstrapping proxy: binds application agents one-to-one to service agents
// from a fixed pool and drives the service lifecycle (announce, assignment,
// readiness round, run command, completion). Data-agnostic: sensing and
// actuation bodies are never parsed here.
class GatewayPeerlet : public Peerlet {
public:
    struct Config {
        std::string serv_info;
        std::vector<NetworkAddress> app_agents;
        std::vector<NetworkAddress> agent_pool; // ordinal = index
        NetworkAddress operator_addr;
        TimeMs ready_timeout_ms = 1000;
        bool auto_announce = true;
    };

    struct Binding {
        NetworkAddress dev_addr;
        std::size_t ordinal = 0;
        bool active = true;
    };

    explicit GatewayPeerlet(Config cfg);

    std::string_view name() const override { return "gateway"; }

    void start() override;
    bool handle_message(const Envelope& env) override;
    void handle_timer(TimerId id) override;

    // Step ii: emits broadcastMsg to every known application agent.
    // Throws when the phase is not IDLE.
    void announce();

    GatewayPhase phase() const { return phase_; }
    const std::vector<Binding>& bindings() const { return bindings_; }
    std::vector<std::size_t> active_ordinals() const;
    std::uint64_t completed_runs() const { return completed_runs_; }
    std::uint64_t rejected_registrations() const { return rejected_registrations_; }
    std::uint64_t ignored_ready_replies() const { return ignored_ready_replies_; }
    std::uint64_t aborted_requests() const { return aborted_requests_; }

private:
    void handle_reg_dev(const Envelope& env);
    void handle_dereg_dev(const Envelope& env);
    void handle_serv_req(const Envelope& env);
    void handle_agn_ready(const Envelope& env);
    void handle_completion(const Envelope& env);
    void notify_operator(const std::string& status, const std::string& detail);
    Binding* find_by_device(const NetworkAddress& dev_addr);

    Config cfg_;
    GatewayPhase phase_ = GatewayPhase::Idle;
    std::vector<Binding> bindings_;
    std::set<std::size_t> bound_ordinals_;
    std::optional<ServiceRequest> pending_service_;
    std::set<std::string> ready_pending_; // agent addresses awaited
    std::vector<std::size_t> run_members_;
    TimerId ready_timeout_timer_ = 0;
    std::uint64_t completed_runs_ = 0;
    std::uint64_t rejected_registrations_ = 0;
    std::uint64_t ignored_ready_replies_ = 0;
    std::uint64_t aborted_requests_ = 0;
};

} // namespace meshbed::boot
