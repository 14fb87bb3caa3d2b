#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "meshbed/bootstrap/messages.hpp"
#include "meshbed/core/rng.hpp"
#include "meshbed/runtime/peer.hpp"
#include "meshbed/runtime/peerlet.hpp"

namespace meshbed::boot {

// Device-side data/behavior plugged into an application agent. Owns the
// plans, streams and preference state of the user's device.
class DeviceModel {
public:
    virtual ~DeviceModel() = default;

    // Replies to a service agent's "req:<what>" sensing request.
    virtual std::string sense(std::string_view what, TimeMs now, Rng& rng) = 0;

    virtual void actuate(std::string_view payload) { (void)payload; }

    // Harness change commands (plan_change, weight_change, ...).
    virtual void command(std::string_view cmd, const FieldRecord& args, TimeMs now,
                         Rng& rng) {
        (void)cmd;
        (void)args;
        (void)now;
        (void)rng;
    }

    // Periodic sensing push; 0 disables the tick.
    virtual TimeMs tick_period_ms() const { return 0; }
    virtual std::string tick(TimeMs now, Rng& rng) {
        (void)now;
        (void)rng;
        return {};
    }
};

// Application agent: registers its device with the gateway, answers
// sensing requests from its one-to-one service agent and applies dynamics
// commands (leave/join/device-specific changes).
class AppAgentPeerlet : public Peerlet {
public:
    struct Config {
        std::string serv_info;
        DeviceInfo dev_info;
        TimeMs sensing_retry_ms = 0; // unused hook for LIVE hardening
    };

    AppAgentPeerlet(Config cfg, std::unique_ptr<DeviceModel> device);

    std::string_view name() const override { return "app-agent"; }

    bool handle_message(const Envelope& env) override;
    void handle_timer(TimerId id) override;

    bool online() const { return online_; }
    bool assigned() const { return service_agent_.has_value(); }
    const std::optional<NetworkAddress>& service_agent() const { return service_agent_; }
    DeviceModel& device() { return *device_; }
    std::uint64_t actuations_received() const { return actuations_; }
    const std::string& last_actuation() const { return last_actuation_; }

private:
    void register_with_gateway();
    void apply_command(const FieldRecord& rec);
    void arm_tick();

    Config cfg_;
    std::unique_ptr<DeviceModel> device_;
    std::optional<NetworkAddress> gateway_;
    std::optional<NetworkAddress> service_agent_;
    bool online_ = true;
    bool streaming_ = false;
    TimerId tick_timer_ = 0;
    TimeMs tick_period_ = 0;
    std::uint64_t actuations_ = 0;
    std::string last_actuation_;
};

} // namespace meshbed::boot
