#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "meshbed/core/ids.hpp"
#include "meshbed/dias/bloom.hpp"

namespace meshbed::dias {

struct AggregateEstimate {
    double sum = 0.0;
    double avg = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::uint64_t count = 0;
    TimeMs as_of = 0;
    bool avg_defined = false;
};

// One supplier->consumer exchange. Wire format (UTF-8):
// `supplier_id;version;new_state_index;new_value;prev_version;prev_value`.
struct SessionMessage {
    PeerId supplier = 0;
    std::uint64_t version = 0;
    std::uint64_t state_index = 0;
    double value = 0.0;
    std::uint64_t prev_version = 0;
    double prev_value = 0.0;

    std::string encode() const;
    static std::optional<SessionMessage> decode(std::string_view body);
};

enum class SessionOutcome { Added, Corrected, Duplicate, Rejected };

std::string_view session_outcome_name(SessionOutcome o);

// Consumer-side duplicate-insensitive aggregate with Bloom-filter memory.
// The per-supplier contribution map is authoritative; the filters are the
// fast membership pre-check. Aggregates are recomputed from the map in
// supplier-id order, which keeps sums bit-identical across consumers.
class AggregationState {
public:
    AggregationState(std::size_t bloom_bits, std::size_t bloom_hashes);

    SessionOutcome apply_session(const SessionMessage& msg);

    // Graceful leave: subtract the supplier's last contribution and
    // tombstone it. Unknown suppliers are a no-op (returns false).
    bool handle_leave(PeerId supplier, std::uint64_t version);

    AggregateEstimate estimate(TimeMs as_of) const;

    std::uint64_t count() const { return static_cast<std::uint64_t>(last_contribution_.size()); }
    double sum() const { return sum_; }
    const std::map<PeerId, std::pair<double, std::uint64_t>>& contributions() const {
        return last_contribution_;
    }
    const BloomFilter& supplier_filter() const { return supplier_filter_; }
    const BloomFilter& state_filter() const { return state_filter_; }
    std::uint64_t rejected_regressions() const { return rejected_regressions_; }

private:
    void recompute();

    BloomFilter supplier_filter_;
    BloomFilter state_filter_;
    std::map<PeerId, std::pair<double, std::uint64_t>> last_contribution_; // value, version
    std::map<PeerId, std::uint64_t> tombstones_; // version at leave
    double sum_ = 0.0;
    double min_ = 0.0;
    double max_ = 0.0;
    std::uint64_t rejected_regressions_ = 0;
};

} // namespace meshbed::dias
