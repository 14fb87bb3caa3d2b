#include "meshbed/monitor/peerlet.hpp"

#include <fstream>

#include "meshbed/core/encoding.hpp"
#include "meshbed/net/envelope.hpp"

namespace meshbed::mon {

MonitorPeerlet::MonitorPeerlet(Config cfg) : cfg_(std::move(cfg)) {}

void MonitorPeerlet::start() {
    flush_timer_ = peer_->schedule_periodic(cfg_.flush_period_ms);
    if (cfg_.memory_period_ms > 0) {
        memory_timer_ = peer_->schedule_periodic(cfg_.memory_period_ms);
    }
    if (!cfg_.schema_keys.empty()) {
        FieldRecord rec;
        rec.set("op", "schema");
        rec.set("token", cfg_.auth_token);
        rec.set_u64("agent", peer_->id());
        for (const auto& key : cfg_.schema_keys) {
            rec.set("key", key);
        }
        peer_->send(cfg_.gateway, msg::kLog, rec.encode());
    }
}

void MonitorPeerlet::stop() {
    flush();
}

bool MonitorPeerlet::handle_message(const Envelope& env) {
    if (env.msg_type != msg::kLog) {
        return false;
    }
    const auto rec = FieldRecord::decode(env.body);
    if (rec && rec->get("op") == "reject") {
        ++rejected_;
    }
    return true;
}

void MonitorPeerlet::handle_timer(TimerId id) {
    if (id == flush_timer_) {
        flush();
    } else if (id == memory_timer_ && cfg_.memory_probe) {
        log_num(LogKind::Memory, "memory_bytes",
                static_cast<double>(cfg_.memory_probe()));
    }
}

bool MonitorPeerlet::log(LogKind kind, std::string_view key, std::string_view value) {
    LogRecord rec;
    rec.agent = peer_->id();
    rec.ts_ms = peer_->now_ms();
    rec.kind = kind;
    rec.key = std::string(key);
    rec.value = std::string(value);

    bool accepted = true;
    if (buffer_.size() >= cfg_.buffer_capacity) {
        buffer_.pop_front();
        ++dropped_local_;
        accepted = false;
    }
    buffer_.push_back(std::move(rec));
    return accepted;
}

bool MonitorPeerlet::log_num(LogKind kind, std::string_view key, double value) {
    return log(kind, key, format_double(value));
}

void MonitorPeerlet::flush() {
    if (buffer_.empty()) {
        return;
    }
    FieldRecord rec;
    rec.set("op", "records");
    rec.set("token", cfg_.auth_token);
    rec.set_u64("agent", peer_->id());
    rec.set_u64("batch", ++batch_seq_);
    for (const auto& r : buffer_) {
        rec.set("r", format_record_line(r));
    }
    emitted_ += buffer_.size();
    buffer_.clear();
    peer_->send(cfg_.gateway, msg::kLog, rec.encode());
}

std::int64_t MonitorPeerlet::rss_bytes() {
    std::ifstream statm("/proc/self/statm");
    long long total = 0;
    long long resident = 0;
    if (statm >> total >> resident) {
        return resident * 4096;
    }
    return -1;
}

bool log_via(Peer& peer, LogKind kind, std::string_view key, std::string_view value) {
    if (auto* mon = peer.find_peerlet<MonitorPeerlet>()) {
        return mon->log(kind, key, value);
    }
    return false;
}

} // namespace meshbed::mon
