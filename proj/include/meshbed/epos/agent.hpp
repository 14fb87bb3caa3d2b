#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "meshbed/bootstrap/service_agent.hpp"
#include "meshbed/epos/cost.hpp"
#include "meshbed/epos/plan.hpp"
#include "meshbed/epos/tree.hpp"

namespace meshbed::epos {

struct EposConfig {
    std::string serv_info = "epos";
    std::uint32_t iterations = 50;
    std::vector<double> steering; // MIN_RMSE target; sized to the plan dimension
    bool normalize_terms = false;
    // 0 = lockstep (parents wait for all children indefinitely); > 0 arms a
    // progress watchdog that aborts a stalled run (async-live).
    TimeMs straggler_timeout_ms = 0;
};

// I-EPOS service agent. Each run (epoch) performs `iterations` learning
// iterations over a balanced binary tree of agent ordinals: a bottom-up pass
// selects plans and aggregates subtree responses, a top-down pass fixes the
// accepted global response. The root accepts an iteration only when the
// global cost did not increase, otherwise every agent reverts to its
// previous selection.
class EposAgentPeerlet : public boot::ServiceAgentPeerlet {
public:
    explicit EposAgentPeerlet(EposConfig cfg);

    std::string_view name() const override { return "epos-agent"; }

    void handle_timer(TimerId id) override;
    bool handle_message(const Envelope& env) override;

    // Observers for tests and metrics.
    std::uint64_t epoch() const { return epoch_; }
    std::uint32_t completed_iterations() const { return t_; }
    bool run_finished() const { return finished_; }
    std::optional<std::size_t> selected_index() const {
        return prev_selected_ == kNoSelection ? std::nullopt
                                              : std::optional<std::size_t>(prev_selected_);
    }
    const PlanSet& current_plans() const { return plans_; }
    const AgentPreferences& preferences() const { return prefs_; }
    const std::vector<double>& last_global_response() const { return prev_global_; }
    double last_global_cost() const { return prev_cost_; }
    const std::vector<double>& last_subtree_response() const { return prev_subtree_; }

protected:
    bool on_ready(const boot::ReadyMsg& msg) override;
    void on_run() override;
    void on_sensing(const boot::DataMsg& msg, const NetworkAddress& from) override;
    void on_device_leave() override;
    void on_device_join() override;

private:
    static constexpr std::size_t kNoSelection = static_cast<std::size_t>(-1);

    struct UpPayload {
        std::vector<double> subtree;
        CostMoments moments;
    };

    void maybe_step_bottom_up();
    void step_bottom_up();
    void root_decide();
    void apply_down(std::uint32_t t, bool accepted, std::vector<double> global,
                    CostMoments moments, double cost);
    void finalize_run();
    void send_up(const UpPayload& payload);
    void send_down(std::uint32_t t, bool accepted, const std::vector<double>& global,
                   const CostMoments& moments, double cost);
    bool is_leaf() const { return children_.empty(); }

    EposConfig cfg_;
    bool active_ = true;

    // Per-epoch state.
    std::uint64_t epoch_ = 0;
    std::uint64_t tree_seed_ = 0;
    GlobalCostFunction gcf_;
    std::uint32_t iterations_ = 0;
    TreeTopology tree_;
    std::optional<std::uint64_t> parent_ordinal_;
    std::vector<std::uint64_t> children_;
    bool is_root_ = false;
    bool plans_ready_ = false;
    bool finished_ = false;
    PlanSet plans_;
    AgentPreferences prefs_;

    std::uint32_t t_ = 0; // completed iterations
    std::vector<double> prev_global_;
    CostMoments prev_global_moments_;
    std::vector<double> prev_subtree_;
    CostMoments prev_subtree_moments_;
    std::size_t prev_selected_ = kNoSelection;
    double prev_cost_ = 0.0;

    std::map<std::uint64_t, UpPayload> child_up_;
    std::size_t cand_selected_ = kNoSelection;
    std::vector<double> cand_subtree_;
    CostMoments cand_moments_;

    TimerId watchdog_ = 0;
    std::uint32_t watchdog_last_t_ = 0;
    bool watchdog_fired_ = false;
};

} // namespace meshbed::epos
