#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "meshbed/bootstrap/service_agent.hpp"
#include "meshbed/dias/aggregation.hpp"
#include "meshbed/dias/sampling.hpp"
#include "meshbed/dias/states.hpp"

namespace meshbed::dias {

struct DiasConfig {
    std::string serv_info = "dias";
    std::size_t view_size = 10;
    TimeMs gossip_period_ms = 100;
    TimeMs dissemination_period_ms = 200;
    std::size_t bloom_m = 2048;
    std::size_t bloom_h = 4;
    std::size_t bootstrap_degree = 3;
};

// DIAS service agent: data supplier and consumer in one peer. The supplier
// summarizes the device stream into a selected state and pushes aggregation
// sessions to the consumers in its view; the consumer keeps a
// duplicate-insensitive aggregate with corrective updates.
class DiasAgentPeerlet : public boot::ServiceAgentPeerlet {
public:
    explicit DiasAgentPeerlet(DiasConfig cfg);

    std::string_view name() const override { return "dias-agent"; }

    bool handle_message(const Envelope& env) override;
    void handle_timer(TimerId id) override;

    const PeerView& view() const { return view_; }
    const AggregationState& consumer() const { return consumer_; }
    const std::optional<SelectedState>& selected() const { return selected_; }
    bool dormant() const { return dormant_; }
    std::uint64_t sessions_sent() const { return sessions_sent_; }
    std::uint64_t sessions_acked() const { return sessions_acked_; }
    std::uint64_t estimates_received() const { return estimates_received_; }

protected:
    bool on_ready(const boot::ReadyMsg& msg) override;
    void on_run() override;
    void on_sensing(const boot::DataMsg& msg, const NetworkAddress& from) override;
    void on_device_leave() override;
    void on_device_join() override;

private:
    void gossip_round();
    void push_session_to_discovered(const std::vector<PeerView::Entry>& before);
    void disseminate();
    void apply_tick(const FieldRecord& rec);
    SessionMessage current_session() const;

    DiasConfig cfg_;
    PeerView view_;
    AggregationState consumer_;
    std::optional<SelectedState> selected_;
    std::optional<SelectedState> previous_;
    PossibleStates states_;
    std::uint64_t last_tick_ = 0;
    bool dormant_ = false;
    bool rebump_version_ = false;
    TimerId gossip_timer_ = 0;
    TimerId dissemination_timer_ = 0;
    std::uint64_t sessions_sent_ = 0;
    std::uint64_t sessions_acked_ = 0;
    std::uint64_t estimates_received_ = 0;
};

} // namespace meshbed::dias
