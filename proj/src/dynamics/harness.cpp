#include "meshbed/dynamics/harness.hpp"

#include "meshbed/bootstrap/messages.hpp"
#include "meshbed/core/rng.hpp"
#include "meshbed/monitor/peerlet.hpp"

namespace meshbed::dyn {

HarnessPeerlet::HarnessPeerlet(Config cfg)
    : cfg_(std::move(cfg)), current_gcf_(cfg_.initial_gcf) {
    cfg_.schedule.validate();
    epos_active_.assign(cfg_.epos_devices.size(), true);
    dias_active_.assign(cfg_.dias_devices.size(), true);
}

Intensity HarnessPeerlet::level_now() const {
    return cfg_.schedule.level_at(peer_->now_ms());
}

void HarnessPeerlet::start() {
    kickoff_timer_ = peer_->schedule_timer(cfg_.initial_delay_ms);
    boundary_timer_ = peer_->schedule_periodic(cfg_.schedule.period_length_ms);
}

void HarnessPeerlet::submit_epos_request() {
    if (!cfg_.epos_enabled || epos_finished()) {
        return;
    }
    std::uint64_t active = 0;
    for (const bool a : epos_active_) {
        active += a ? 1 : 0;
    }
    const std::uint64_t epoch = counters_.epochs_completed + 1;
    boot::ServiceRequest req;
    req.serv_info = cfg_.epos_serv_info;
    req.serv_md.agent_count = active;
    req.serv_md.device_count = active;
    req.serv_md.set_param("epoch", std::to_string(epoch));
    req.serv_md.set_param("seed",
                          std::to_string(Rng(cfg_.seed).fork(epoch).next_u64()));
    req.serv_md.set_param("cost_function", current_gcf_);
    req.serv_md.set_param("iterations", std::to_string(cfg_.epos_iterations));
    peer_->send(cfg_.epos_gateway, msg::kServReq, boot::serv_req_body(req));
    epos_request_outstanding_ = true;
    mon::log_via(*peer_, mon::LogKind::Event, "epoch_submit", std::to_string(epoch));
}

void HarnessPeerlet::submit_dias_request() {
    if (!cfg_.dias_enabled || dias_running_) {
        return;
    }
    boot::ServiceRequest req;
    req.serv_info = cfg_.dias_serv_info;
    req.serv_md.agent_count = cfg_.dias_devices.size();
    req.serv_md.device_count = cfg_.dias_devices.size();
    peer_->send(cfg_.dias_gateway, msg::kServReq, boot::serv_req_body(req));
}

bool HarnessPeerlet::handle_message(const Envelope& env) {
    if (env.msg_type != msg::kOperatorNotice) {
        return false;
    }
    const auto notice = boot::parse_operator_notice(env.body);
    if (!notice) {
        return true;
    }
    if (notice->serv_info == cfg_.epos_serv_info && cfg_.epos_enabled) {
        if (notice->status == "done") {
            epos_request_outstanding_ = false;
            on_epoch_done();
        } else if (notice->status == "aborted" || notice->status == "rejected") {
            ++counters_.epochs_aborted;
            epos_request_outstanding_ = false;
            mon::log_via(*peer_, mon::LogKind::Event, "epoch_retry", notice->detail);
            retry_timer_ = peer_->schedule_timer(cfg_.retry_delay_ms);
        }
        return true;
    }
    if (notice->serv_info == cfg_.dias_serv_info && cfg_.dias_enabled) {
        if (notice->status == "running") {
            dias_running_ = true;
            if (cfg_.inject_changes) {
                dias_update_tick_periods();
                const DiasPeriods periods = dias_periods_for(
                    level_now(), cfg_.schedule.period_length_ms);
                dias_ps_timer_ = peer_->schedule_timer(periods.possible_state_period_ms);
                dias_churn_timer_ = peer_->schedule_timer(periods.churn_period_ms);
            }
        } else if (notice->status == "rejected") {
            retry_timer_ = peer_->schedule_timer(cfg_.retry_delay_ms);
        }
        return true;
    }
    return true;
}

void HarnessPeerlet::on_epoch_done() {
    ++counters_.epochs_completed;
    mon::log_via(*peer_, mon::LogKind::Event, "epoch_done",
                 std::to_string(counters_.epochs_completed));
    if (epos_finished()) {
        mon::log_via(*peer_, mon::LogKind::Event, "epos_complete",
                     std::to_string(counters_.epochs_completed));
        return;
    }
    if (cfg_.inject_changes) {
        draw_changes();
    }
    if (queue_.empty()) {
        submit_epos_request();
    } else {
        submit_after_queue_ = true;
        pump_commands();
    }
}

void HarnessPeerlet::queue_command(const NetworkAddress& target, const FieldRecord& rec) {
    queue_.push_back(PendingCommand{target, rec.encode()});
}

void HarnessPeerlet::draw_changes() {
    const Intensity level = level_now();
    const EposRates rates = epos_rates_for(level);
    const std::uint64_t epoch = counters_.epochs_completed;
    Rng rng = Rng(cfg_.seed).fork(0xC0DE + epoch);

    for (std::size_t i = 0; i < cfg_.epos_devices.size(); ++i) {
        // Draws happen for every agent; applying to a departed agent is
        // skipped (and logged as such).
        if (rng.bernoulli(rates.plan_change)) {
            if (epos_active_[i]) {
                FieldRecord rec;
                rec.set("cmd", "plan_change");
                queue_command(cfg_.epos_devices[i], rec);
                ++counters_.plan_changes;
                mon::log_via(*peer_, mon::LogKind::Event, "change",
                             std::to_string(epoch) + ",plan," + std::to_string(i));
            } else {
                mon::log_via(*peer_, mon::LogKind::Event, "change_skipped",
                             std::to_string(epoch) + ",plan," + std::to_string(i));
            }
        }
        if (rng.bernoulli(rates.weight_change)) {
            if (epos_active_[i]) {
                // Live-operations regime: beta uniform, alpha the complement.
                const double beta = rng.uniform_real();
                FieldRecord rec;
                rec.set("cmd", "weight_change");
                rec.set_f64("alpha", 1.0 - beta);
                rec.set_f64("beta", beta);
                queue_command(cfg_.epos_devices[i], rec);
                ++counters_.weight_changes;
                mon::log_via(*peer_, mon::LogKind::Event, "change",
                             std::to_string(epoch) + ",weight," + std::to_string(i));
            } else {
                mon::log_via(*peer_, mon::LogKind::Event, "change_skipped",
                             std::to_string(epoch) + ",weight," + std::to_string(i));
            }
        }
        if (rng.bernoulli(rates.churn)) {
            FieldRecord rec;
            rec.set("cmd", epos_active_[i] ? "leave" : "join");
            queue_command(cfg_.epos_devices[i], rec);
            if (epos_active_[i]) {
                ++counters_.leaves;
            } else {
                ++counters_.joins;
            }
            mon::log_via(*peer_, mon::LogKind::Event, "change",
                         std::to_string(epoch) + "," +
                             (epos_active_[i] ? "leave," : "join,") + std::to_string(i));
            epos_active_[i] = !epos_active_[i];
        }
    }
    // System-wide cost function switch: one draw per run.
    if (rng.bernoulli(rates.gcf_change)) {
        current_gcf_ = current_gcf_ == "MIN_VAR" ? "MIN_RMSE" : "MIN_VAR";
        ++counters_.gcf_changes;
        mon::log_via(*peer_, mon::LogKind::Event, "change",
                     std::to_string(epoch) + ",gcf," + current_gcf_);
    }
}

void HarnessPeerlet::pump_commands() {
    if (queue_.empty()) {
        if (submit_after_queue_) {
            submit_after_queue_ = false;
            submit_epos_request();
        }
        return;
    }
    PendingCommand cmd = std::move(queue_.front());
    queue_.pop_front();
    peer_->send(cmd.target, msg::kChangeCommand, cmd.body);
    pump_timer_ = peer_->schedule_timer(cfg_.change_stagger_ms);
}

void HarnessPeerlet::dias_update_tick_periods() {
    const DiasPeriods periods =
        dias_periods_for(level_now(), cfg_.schedule.period_length_ms);
    FieldRecord rec;
    rec.set("cmd", "tick_period");
    rec.set_u64("ms", static_cast<std::uint64_t>(periods.selected_state_period_ms));
    const std::string body = rec.encode();
    for (const auto& dev : cfg_.dias_devices) {
        peer_->send(dev, msg::kChangeCommand, body);
    }
}

void HarnessPeerlet::handle_timer(TimerId id) {
    if (id == kickoff_timer_ || id == retry_timer_) {
        submit_epos_request();
        submit_dias_request();
        return;
    }
    if (id == pump_timer_) {
        pump_commands();
        return;
    }
    if (id == boundary_timer_) {
        mon::log_via(*peer_, mon::LogKind::Event, "intensity",
                     std::string(intensity_name(level_now())));
        if (dias_running_ && cfg_.inject_changes) {
            dias_update_tick_periods();
        }
        return;
    }
    if (id == dias_ps_timer_ && dias_running_) {
        FieldRecord rec;
        rec.set("cmd", "possible_states");
        const std::string body = rec.encode();
        for (std::size_t i = 0; i < cfg_.dias_devices.size(); ++i) {
            peer_->send(cfg_.dias_devices[i], msg::kChangeCommand, body);
            ++counters_.possible_state_changes;
        }
        mon::log_via(*peer_, mon::LogKind::Event, "dias_states_burst",
                     std::to_string(peer_->now_ms()));
        const DiasPeriods periods =
            dias_periods_for(level_now(), cfg_.schedule.period_length_ms);
        dias_ps_timer_ = peer_->schedule_timer(periods.possible_state_period_ms);
        return;
    }
    if (id == dias_churn_timer_ && dias_running_ && cfg_.inject_changes) {
        FieldRecord rec;
        rec.set("cmd", dias_out_ ? "join" : "leave");
        const std::string body = rec.encode();
        for (std::size_t i = 0; i < cfg_.dias_devices.size(); ++i) {
            peer_->send(cfg_.dias_devices[i], msg::kChangeCommand, body);
            if (dias_out_) {
                ++counters_.joins;
            } else {
                ++counters_.leaves;
            }
        }
        dias_out_ = !dias_out_;
        mon::log_via(*peer_, mon::LogKind::Event,
                     dias_out_ ? "dias_all_leave" : "dias_all_join",
                     std::to_string(peer_->now_ms()));
        const DiasPeriods periods =
            dias_periods_for(level_now(), cfg_.schedule.period_length_ms);
        dias_churn_timer_ = peer_->schedule_timer(periods.churn_period_ms);
        return;
    }
}

} // namespace meshbed::dyn
