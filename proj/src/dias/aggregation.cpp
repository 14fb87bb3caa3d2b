#include "meshbed/dias/aggregation.hpp"

#include "meshbed/core/encoding.hpp"

namespace meshbed::dias {

std::string SessionMessage::encode() const {
    std::string out = std::to_string(supplier);
    out += ';';
    out += std::to_string(version);
    out += ';';
    out += std::to_string(state_index);
    out += ';';
    out += format_double(value);
    out += ';';
    out += std::to_string(prev_version);
    out += ';';
    out += format_double(prev_value);
    return out;
}

std::optional<SessionMessage> SessionMessage::decode(std::string_view body) {
    const auto parts = split(body, ';');
    if (parts.size() != 6) {
        return std::nullopt;
    }
    SessionMessage msg;
    const auto supplier = parse_u64(parts[0]);
    const auto version = parse_u64(parts[1]);
    const auto index = parse_u64(parts[2]);
    const auto value = parse_double(parts[3]);
    const auto prev_version = parse_u64(parts[4]);
    const auto prev_value = parse_double(parts[5]);
    if (!supplier || !version || !index || !value || !prev_version || !prev_value) {
        return std::nullopt;
    }
    msg.supplier = *supplier;
    msg.version = *version;
    msg.state_index = *index;
    msg.value = *value;
    msg.prev_version = *prev_version;
    msg.prev_value = *prev_value;
    return msg;
}

std::string_view session_outcome_name(SessionOutcome o) {
    switch (o) {
    case SessionOutcome::Added: return "added";
    case SessionOutcome::Corrected: return "corrected";
    case SessionOutcome::Duplicate: return "duplicate";
    case SessionOutcome::Rejected: return "rejected";
    }
    return "?";
}

AggregationState::AggregationState(std::size_t bloom_bits, std::size_t bloom_hashes)
    : supplier_filter_(bloom_bits, bloom_hashes), state_filter_(bloom_bits, bloom_hashes) {}

void AggregationState::recompute() {
    sum_ = 0.0;
    min_ = 0.0;
    max_ = 0.0;
    bool first = true;
    for (const auto& [supplier, contribution] : last_contribution_) {
        const double v = contribution.first;
        sum_ += v;
        if (first || v < min_) {
            min_ = v;
        }
        if (first || v > max_) {
            max_ = v;
        }
        first = false;
    }
}

SessionOutcome AggregationState::apply_session(const SessionMessage& msg) {
    const std::uint64_t state_id = (msg.supplier << 20) ^ msg.version;

    const auto it = last_contribution_.find(msg.supplier);
    if (it != last_contribution_.end()) {
        if (msg.version < it->second.second) {
            ++rejected_regressions_;
            return SessionOutcome::Rejected;
        }
        if (msg.version == it->second.second) {
            return SessionOutcome::Duplicate; // replayed session: no-op
        }
        // Newer state: corrective replace of the recorded contribution.
        it->second = {msg.value, msg.version};
        state_filter_.insert_u64(state_id);
        recompute();
        return SessionOutcome::Corrected;
    }

    if (const auto tomb = tombstones_.find(msg.supplier); tomb != tombstones_.end()) {
        if (msg.version <= tomb->second) {
            ++rejected_regressions_;
            return SessionOutcome::Rejected; // stale replay from before the leave
        }
        tombstones_.erase(tomb);
    }

    // The supplier filter short-circuits the common "unseen" case; the map
    // stays authoritative when the filter reports a (possible) false
    // positive.
    const bool maybe_seen = supplier_filter_.contains_u64(msg.supplier);
    (void)maybe_seen;

    last_contribution_[msg.supplier] = {msg.value, msg.version};
    supplier_filter_.insert_u64(msg.supplier);
    state_filter_.insert_u64(state_id);
    recompute();
    return SessionOutcome::Added;
}

bool AggregationState::handle_leave(PeerId supplier, std::uint64_t version) {
    const auto it = last_contribution_.find(supplier);
    if (it == last_contribution_.end()) {
        return false; // unknown supplier: no-op
    }
    const std::uint64_t recorded_version = it->second.second;
    last_contribution_.erase(it);
    tombstones_[supplier] = std::max(version, recorded_version);
    recompute();
    return true;
}

AggregateEstimate AggregationState::estimate(TimeMs as_of) const {
    AggregateEstimate est;
    est.count = count();
    est.sum = sum_;
    est.min = min_;
    est.max = max_;
    est.as_of = as_of;
    if (est.count > 0) {
        est.avg = sum_ / static_cast<double>(est.count);
        est.avg_defined = true;
    }
    return est;
}

} // namespace meshbed::dias
