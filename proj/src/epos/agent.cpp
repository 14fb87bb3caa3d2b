#include "meshbed/epos/agent.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "meshbed/core/binary.hpp"
#include "meshbed/monitor/peerlet.hpp"

namespace meshbed::epos {

namespace {

void write_moments(BinaryWriter& w, const CostMoments& m) {
    w.f64(m.sum);
    w.f64(m.sumsq);
    w.u64(m.count);
}

CostMoments read_moments(BinaryReader& r) {
    CostMoments m;
    m.sum = r.f64();
    m.sumsq = r.f64();
    m.count = r.u64();
    return m;
}

} // namespace

EposAgentPeerlet::EposAgentPeerlet(EposConfig cfg)
    : boot::ServiceAgentPeerlet(cfg.serv_info), cfg_(std::move(cfg)) {}

bool EposAgentPeerlet::on_ready(const boot::ReadyMsg& msg) {
    if (!active_) {
        return false;
    }
    const auto epoch = msg.serv_md.param_u64("epoch");
    const auto seed = msg.serv_md.param_u64("seed");
    epoch_ = epoch.value_or(epoch_ + 1);
    tree_seed_ = seed.value_or(epoch_);

    gcf_ = GlobalCostFunction{};
    if (const auto kind = msg.serv_md.param("cost_function")) {
        const auto parsed = gcf_from_name(*kind);
        if (!parsed) {
            mon::log_via(*peer_, mon::LogKind::Event, "bad_cost_function", *kind);
            return false;
        }
        gcf_.kind = *parsed;
    }
    if (gcf_.kind == GlobalCostKind::MinRmse) {
        gcf_.steering = cfg_.steering;
    }
    iterations_ = static_cast<std::uint32_t>(
        msg.serv_md.param_u64("iterations").value_or(cfg_.iterations));
    if (iterations_ == 0) {
        return false;
    }

    std::vector<std::uint64_t> ids;
    for (const auto& [ordinal, addr] : members_) {
        ids.push_back(ordinal);
    }
    tree_ = build_tree(ids, tree_seed_);
    const std::uint64_t self = *ordinal_;
    parent_ordinal_ = tree_.parent.at(self);
    children_ = tree_.children.at(self);
    is_root_ = tree_.root == self;

    plans_ready_ = false;
    finished_ = false;
    t_ = 0;
    prev_global_.clear();
    prev_global_moments_ = {};
    prev_subtree_.clear();
    prev_subtree_moments_ = {};
    prev_selected_ = kNoSelection;
    prev_cost_ = std::numeric_limits<double>::infinity();
    child_up_.clear();
    cand_selected_ = kNoSelection;
    watchdog_last_t_ = 0;
    watchdog_fired_ = false;
    return true;
}

void EposAgentPeerlet::on_run() {
    request_sensing("plans");
    if (cfg_.straggler_timeout_ms > 0 && watchdog_ == 0) {
        watchdog_ = peer_->schedule_periodic(cfg_.straggler_timeout_ms);
    }
}

void EposAgentPeerlet::on_sensing(const boot::DataMsg& msg, const NetworkAddress&) {
    if (!running_ || finished_) {
        mon::log_via(*peer_, mon::LogKind::Event, "sensing_rejected", "not running");
        return;
    }
    const auto rec = FieldRecord::decode(msg.payload);
    if (!rec || !rec->has("plans")) {
        return;
    }
    try {
        plans_ = parse_plan_set(*rec->get("plans"));
        prefs_.alpha = rec->get_f64("alpha").value_or(0.0);
        prefs_.beta = rec->get_f64("beta").value_or(0.0);
        prefs_.validate();
        if (gcf_.kind == GlobalCostKind::MinRmse &&
            gcf_.steering.size() != plans_.dimension()) {
            throw std::invalid_argument("steering/plan dimension mismatch");
        }
    } catch (const std::exception& e) {
        mon::log_via(*peer_, mon::LogKind::Event, "bad_plan_data", e.what());
        return;
    }
    const std::size_t d = plans_.dimension();
    prev_global_.assign(d, 0.0);
    prev_subtree_.assign(d, 0.0);
    plans_ready_ = true;
    mon::log_via(*peer_, mon::LogKind::Event, "work_start", std::to_string(epoch_));
    maybe_step_bottom_up();
}

bool EposAgentPeerlet::handle_message(const Envelope& env) {
    if (env.msg_type == msg::kEposUp) {
        BinaryReader r(env.body);
        const std::uint64_t epoch = r.u64();
        const std::uint32_t t = r.u32();
        const std::uint64_t child = r.u64();
        UpPayload up;
        up.subtree = r.f64_vec();
        up.moments = read_moments(r);
        if (epoch != epoch_ || finished_ || t != t_ + 1) {
            mon::log_via(*peer_, mon::LogKind::Event, "stale_up",
                         std::to_string(epoch) + "," + std::to_string(t));
            return true;
        }
        child_up_[child] = std::move(up);
        maybe_step_bottom_up();
        return true;
    }
    if (env.msg_type == msg::kEposDown) {
        BinaryReader r(env.body);
        const std::uint64_t epoch = r.u64();
        const std::uint32_t t = r.u32();
        const bool accepted = r.u8() != 0;
        std::vector<double> global = r.f64_vec();
        const CostMoments moments = read_moments(r);
        const double cost = r.f64();
        if (epoch != epoch_ || finished_ || t != t_ + 1) {
            mon::log_via(*peer_, mon::LogKind::Event, "stale_down",
                         std::to_string(epoch) + "," + std::to_string(t));
            return true;
        }
        apply_down(t, accepted, std::move(global), moments, cost);
        return true;
    }
    return boot::ServiceAgentPeerlet::handle_message(env);
}

void EposAgentPeerlet::maybe_step_bottom_up() {
    if (!plans_ready_ || finished_ || t_ >= iterations_) {
        return;
    }
    if (child_up_.size() < children_.size()) {
        return;
    }
    step_bottom_up();
}

void EposAgentPeerlet::step_bottom_up() {
    const std::size_t d = plans_.dimension();

    // context = accepted global response minus own subtree's share
    std::vector<double> context(d);
    for (std::size_t i = 0; i < d; ++i) {
        context[i] = prev_global_[i] - prev_subtree_[i];
    }
    CostMoments context_moments = prev_global_moments_ - prev_subtree_moments_;

    // children aggregated in ordinal order for a deterministic float sum
    std::vector<double> children_sum(d, 0.0);
    CostMoments children_moments;
    for (const std::uint64_t c : children_) {
        const UpPayload& up = child_up_.at(c);
        if (up.subtree.size() != d) {
            throw std::runtime_error("epos: child subtree dimension mismatch");
        }
        for (std::size_t i = 0; i < d; ++i) {
            children_sum[i] += up.subtree[i];
        }
        children_moments += up.moments;
    }

    std::vector<double> selection_context(d);
    for (std::size_t i = 0; i < d; ++i) {
        selection_context[i] = context[i] + children_sum[i];
    }

    SelectionInput in;
    in.plans = &plans_;
    in.prefs = prefs_;
    in.gcf = &gcf_;
    in.context = selection_context;
    in.base_moments = context_moments + children_moments;
    in.normalize_terms = cfg_.normalize_terms;
    cand_selected_ = select_plan(in);

    cand_subtree_.assign(d, 0.0);
    const Plan& chosen = plans_.plans[cand_selected_];
    for (std::size_t i = 0; i < d; ++i) {
        cand_subtree_[i] = children_sum[i] + chosen.values[i];
    }
    cand_moments_ = children_moments;
    cand_moments_.add(chosen.local_cost);

    child_up_.clear();

    if (is_root_) {
        root_decide();
        return;
    }
    send_up(UpPayload{cand_subtree_, cand_moments_});
}

void EposAgentPeerlet::root_decide() {
    const std::uint32_t t = t_ + 1;
    const double cost = gcf_.evaluate(cand_subtree_);
    const bool accepted = !(cost > prev_cost_);
    std::vector<double> global;
    CostMoments moments;
    double fixed_cost = 0.0;
    if (accepted) {
        global = cand_subtree_;
        moments = cand_moments_;
        fixed_cost = cost;
    } else {
        global = prev_global_;
        moments = prev_global_moments_;
        fixed_cost = prev_cost_;
    }
    mon::log_via(*peer_, mon::LogKind::Service, "g",
                 std::to_string(epoch_) + "," + std::to_string(t) + "," +
                     format_double(fixed_cost));
    mon::log_via(*peer_, mon::LogKind::Service, "l",
                 std::to_string(epoch_) + "," + std::to_string(t) + "," +
                     format_double(moments.mean()));
    send_down(t, accepted, global, moments, fixed_cost);
    apply_down(t, accepted, std::move(global), moments, fixed_cost);
}

void EposAgentPeerlet::apply_down(std::uint32_t t, bool accepted, std::vector<double> global,
                                  CostMoments moments, double cost) {
    if (accepted) {
        prev_subtree_ = cand_subtree_;
        prev_subtree_moments_ = cand_moments_;
        prev_selected_ = cand_selected_;
    }
    prev_global_ = std::move(global);
    prev_global_moments_ = moments;
    prev_cost_ = cost;
    t_ = t;

    if (!is_root_) {
        send_down(t, accepted, prev_global_, prev_global_moments_, cost);
    }

    if (t_ >= iterations_) {
        finalize_run();
        return;
    }
    if (is_leaf()) {
        maybe_step_bottom_up();
    }
}

void EposAgentPeerlet::finalize_run() {
    if (finished_) {
        return;
    }
    finished_ = true;
    send_to_device(msg::kActuation,
                   boot::actuation_body(serv_info_,
                                        "plan_index=" + std::to_string(prev_selected_)));
    if (is_root_) {
        mon::log_via(*peer_, mon::LogKind::Event, "epoch_end", std::to_string(epoch_));
        send_completion("epoch=" + std::to_string(epoch_) +
                        " cost=" + format_double(prev_cost_));
    }
}

void EposAgentPeerlet::send_up(const UpPayload& payload) {
    BinaryWriter w;
    w.u64(epoch_);
    w.u32(t_ + 1);
    w.u64(*ordinal_);
    w.f64_vec(payload.subtree);
    write_moments(w, payload.moments);
    peer_->send(members_.at(*parent_ordinal_), msg::kEposUp, w.take());
}

void EposAgentPeerlet::send_down(std::uint32_t t, bool accepted,
                                 const std::vector<double>& global,
                                 const CostMoments& moments, double cost) {
    BinaryWriter w;
    w.u64(epoch_);
    w.u32(t);
    w.u8(accepted ? 1 : 0);
    w.f64_vec(global);
    write_moments(w, moments);
    w.f64(cost);
    const std::string body = w.take();
    for (const std::uint64_t c : children_) {
        peer_->send(members_.at(c), msg::kEposDown, body);
    }
}

void EposAgentPeerlet::handle_timer(TimerId id) {
    if (id != watchdog_ || watchdog_fired_ || finished_ || !running_) {
        if (id == watchdog_) {
            watchdog_last_t_ = t_;
        }
        return;
    }
    if (t_ == watchdog_last_t_ && plans_ready_) {
        // No progress across a full timeout window: abort the run.
        watchdog_fired_ = true;
        mon::log_via(*peer_, mon::LogKind::Event, "epoch_stalled",
                     std::to_string(epoch_) + " at t=" + std::to_string(t_));
        if (is_root_) {
            send_completion("epoch=" + std::to_string(epoch_) + " aborted=stalled");
        }
        finished_ = true;
    }
    watchdog_last_t_ = t_;
}

void EposAgentPeerlet::on_device_leave() {
    active_ = false;
}

void EposAgentPeerlet::on_device_join() {
    active_ = true;
}

} // namespace meshbed::epos
