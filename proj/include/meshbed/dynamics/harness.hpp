#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "meshbed/core/encoding.hpp"
#include "meshbed/dynamics/schedule.hpp"
#include "meshbed/net/envelope.hpp"
#include "meshbed/runtime/peer.hpp"
#include "meshbed/runtime/peerlet.hpp"

namespace meshbed::dyn {

// Scenario driver and service operator in one peerlet: submits service
// requests, applies the intensity schedule's change mix between learning
// runs, and drives the aggregation service's periodic dynamics. All changes
// travel as ordinary messages; service state is never touched directly.
class HarnessPeerlet : public Peerlet {
public:
    struct Config {
        IntensitySchedule schedule;
        std::uint64_t seed = 1;
        TimeMs initial_delay_ms = 10;
        TimeMs retry_delay_ms = 100;
        TimeMs change_stagger_ms = 1;
        bool inject_changes = true;
        std::uint64_t max_epochs = 0; // 0 = run until stopped

        bool epos_enabled = false;
        NetworkAddress epos_gateway;
        std::string epos_serv_info = "epos";
        std::vector<NetworkAddress> epos_devices; // index = ordinal
        std::string initial_gcf = "MIN_VAR";
        std::uint32_t epos_iterations = 50;

        bool dias_enabled = false;
        NetworkAddress dias_gateway;
        std::string dias_serv_info = "dias";
        std::vector<NetworkAddress> dias_devices;
    };

    // Counter fields are atomic so a LIVE driver thread can poll progress
    // while the peer executor mutates them.
    struct Counters {
        std::atomic<std::uint64_t> epochs_completed{0};
        std::atomic<std::uint64_t> epochs_aborted{0};
        std::atomic<std::uint64_t> plan_changes{0};
        std::atomic<std::uint64_t> weight_changes{0};
        std::atomic<std::uint64_t> gcf_changes{0};
        std::atomic<std::uint64_t> possible_state_changes{0};
        std::atomic<std::uint64_t> joins{0};
        std::atomic<std::uint64_t> leaves{0};

        std::uint64_t parameter_changes() const {
            return plan_changes + weight_changes + gcf_changes + possible_state_changes;
        }
        std::uint64_t join_leave() const { return joins + leaves; }
    };

    explicit HarnessPeerlet(Config cfg);

    std::string_view name() const override { return "harness"; }

    void start() override;
    bool handle_message(const Envelope& env) override;
    void handle_timer(TimerId id) override;

    const Counters& counters() const { return counters_; }
    bool epos_finished() const {
        return cfg_.max_epochs != 0 && counters_.epochs_completed >= cfg_.max_epochs;
    }
    const std::string& current_gcf() const { return current_gcf_; }
    bool dias_running() const { return dias_running_; }

private:
    struct PendingCommand {
        NetworkAddress target;
        std::string body;
    };

    void submit_epos_request();
    void submit_dias_request();
    void on_epoch_done();
    void draw_changes();
    void pump_commands();
    void queue_command(const NetworkAddress& target, const FieldRecord& rec);
    void dias_update_tick_periods();
    Intensity level_now() const;

    Config cfg_;
    Counters counters_;
    std::string current_gcf_;
    std::vector<bool> epos_active_;
    std::vector<bool> dias_active_;
    bool dias_out_ = false;
    bool dias_running_ = false;
    bool epos_request_outstanding_ = false;

    std::deque<PendingCommand> queue_;
    bool submit_after_queue_ = false;
    TimerId kickoff_timer_ = 0;
    TimerId retry_timer_ = 0;
    TimerId pump_timer_ = 0;
    TimerId dias_ps_timer_ = 0;
    TimerId dias_churn_timer_ = 0;
    TimerId boundary_timer_ = 0;
};

} // namespace meshbed::dyn
