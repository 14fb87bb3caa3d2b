#include "meshbed/monitor/gateway.hpp"

#include "meshbed/core/encoding.hpp"
#include "meshbed/net/envelope.hpp"

namespace meshbed::mon {

LogGatewayPeerlet::LogGatewayPeerlet(Config cfg, RecordStore& store)
    : cfg_(std::move(cfg)), store_(store) {}

void LogGatewayPeerlet::start() {
    commit_timer_ = peer_->schedule_periodic(cfg_.commit_period_ms);
}

void LogGatewayPeerlet::stop() {
    flush();
}

bool LogGatewayPeerlet::handle_message(const Envelope& env) {
    if (env.msg_type != msg::kLog) {
        return false;
    }
    const auto rec = FieldRecord::decode(env.body);
    if (!rec) {
        return true;
    }
    const auto token = rec->get("token");
    if (!token || cfg_.auth_tokens.count(*token) == 0) {
        ++unauthorized_;
        FieldRecord reply;
        reply.set("op", "reject");
        reply.set("reason", "unauthorized");
        peer_->send(env.sender, msg::kLog, reply.encode());
        return true;
    }
    const auto op = rec->get("op");
    const auto agent = rec->get_u64("agent");
    if (!op || !agent) {
        return true;
    }

    if (*op == "schema") {
        auto& keys = schemas_[*agent];
        for (const auto& key : rec->get_all("key")) {
            keys.insert(key);
        }
        return true;
    }
    if (*op != "records") {
        return true;
    }

    // Re-sent batches (e.g. around an agent restart) are ignored, which
    // keeps persistence exactly-once per emitted record.
    const auto batch = rec->get_u64("batch");
    if (!batch) {
        return true;
    }
    auto [it, inserted] = last_batch_.try_emplace(*agent, 0);
    if (!inserted && *batch <= it->second) {
        return true;
    }
    it->second = *batch;

    for (const auto& line : rec->get_all("r")) {
        auto parsed = parse_record_line(line);
        if (!parsed) {
            continue;
        }
        ++received_;
        if (pending_.size() >= cfg_.queue_capacity) {
            ++dropped_overflow_;
            continue;
        }
        pending_.push_back(std::move(*parsed));
    }
    return true;
}

void LogGatewayPeerlet::handle_timer(TimerId id) {
    if (id != commit_timer_) {
        return;
    }
    commit_chunk();
}

void LogGatewayPeerlet::commit_chunk() {
    if (pending_.empty()) {
        return;
    }
    std::vector<LogRecord> batch;
    const std::size_t n = std::min(pending_.size(), cfg_.commit_batch);
    batch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        batch.push_back(std::move(pending_.front()));
        pending_.pop_front();
    }
    try {
        store_.append_batch(batch);
    } catch (const std::exception&) {
        // One retry, then the batch is dropped with an EVENT mark.
        try {
            store_.append_batch(batch);
        } catch (const std::exception& retry_err) {
            dropped_commit_ += batch.size();
            LogRecord note;
            note.agent = peer_->id();
            note.ts_ms = peer_->now_ms();
            note.kind = LogKind::Event;
            note.key = "commit_dropped";
            note.value = std::to_string(batch.size()) + " records: " + retry_err.what();
            pending_.push_back(std::move(note));
        }
    }
}

void LogGatewayPeerlet::flush() {
    std::size_t guard = pending_.size() + cfg_.commit_batch;
    while (!pending_.empty() && guard-- > 0) {
        commit_chunk();
    }
}

std::vector<LogRecord> LogGatewayPeerlet::query(const RecordStore::Filter& filter) const {
    return store_.query(filter);
}

} // namespace meshbed::mon
