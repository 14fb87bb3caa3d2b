#pragma once

#include <map>
#include <optional>
#include <string>

#include "meshbed/bootstrap/messages.hpp"
#include "meshbed/runtime/peer.hpp"
#include "meshbed/runtime/peerlet.hpp"

namespace meshbed::boot {

// Common bootstrap-side behavior of a service agent: validates readiness
// rounds, tracks the member table and its one-to-one device, and runs the
// service on runServMsg. Service logic (I-EPOS, DIAS) derives from this.
class ServiceAgentPeerlet : public Peerlet {
public:
    explicit ServiceAgentPeerlet(std::string serv_info);

    bool handle_message(const Envelope& env) override;

    bool running() const { return running_; }
    std::optional<std::size_t> ordinal() const { return ordinal_; }
    const std::map<std::size_t, NetworkAddress>& members() const { return members_; }
    const std::optional<NetworkAddress>& device() const { return device_; }

protected:
    // Validation/preparation hook; return false to withhold agnReadyMsg
    // (used by tests to exercise the readiness timeout).
    virtual bool on_ready(const ReadyMsg& msg) {
        (void)msg;
        return true;
    }
    virtual void on_run() {}
    virtual void on_sensing(const DataMsg& msg, const NetworkAddress& from) {
        (void)msg;
        (void)from;
    }
    // Device went offline / came back (churn).
    virtual void on_device_leave() {}
    virtual void on_device_join() {}

    void send_to_device(std::uint16_t type, const std::string& body);
    void send_completion(const std::string& note);
    void request_sensing(const std::string& what);

    std::string serv_info_;
    std::optional<NetworkAddress> gateway_;
    std::optional<NetworkAddress> device_;
    std::optional<std::size_t> ordinal_;
    std::map<std::size_t, NetworkAddress> members_;
    ServiceMetadata current_md_;
    bool running_ = false;

private:
    bool absorb_ready(const ReadyMsg& msg);
};

} // namespace meshbed::boot
