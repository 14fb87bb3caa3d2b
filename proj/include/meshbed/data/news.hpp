#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "meshbed/core/rng.hpp"
#include "meshbed/dias/states.hpp"

namespace meshbed::data {

struct NewsStreamSpec {
    std::uint32_t num_sources = 28;
    TimeMs tick_period_ms = 0;
    std::uint64_t seed = 0;
    std::string endpoint; // non-empty: HTTP ingestion instead of synthesis
};

// Seeded bursty news-count process: per-source log-normal base rate with an
// hour-of-day modulation. Integer counts, reproducible per (seed, tick).
class NewsSynth {
public:
    NewsSynth(std::uint64_t seed, std::uint32_t num_sources);

    std::vector<std::int64_t> tick(std::uint64_t tick_index);
    std::int64_t source_tick(std::uint32_t source, std::uint64_t tick_index);

private:
    std::uint64_t seed_;
    std::vector<double> base_rates_;
};

// Uniformly samples k values from the most recent `window_size`
// observations, deduplicates, pads with nearest +/-1 offsets when fewer
// than k distinct values exist, and returns them sorted.
dias::PossibleStates derive_possible_states(std::span<const double> window, std::size_t k,
                                            std::size_t window_size, Rng& rng);

// HTTP ingestion: GET `endpoint` returning UTF-8 lines `source_id,count`.
struct NewsFetch {
    bool ok = false;
    std::string error;
    std::vector<std::int64_t> counts;
};
NewsFetch fetch_news_counts(const std::string& endpoint, std::uint32_t num_sources);

// One tick of the stream op: synthetic draw or endpoint fetch with
// last-value fallback. `last` may be empty (no prior tick).
struct StreamTick {
    bool ok = false;
    bool fallback = false;
    std::vector<std::int64_t> counts;
};
StreamTick stream_tick(const NewsStreamSpec& spec, std::uint64_t tick_index,
                       const std::vector<std::int64_t>& last);

} // namespace meshbed::data
