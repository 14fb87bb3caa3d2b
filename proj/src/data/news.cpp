#include "meshbed/data/news.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "httplib.h"

#include "meshbed/core/encoding.hpp"

namespace meshbed::data {

NewsSynth::NewsSynth(std::uint64_t seed, std::uint32_t num_sources) : seed_(seed) {
    Rng rng(seed);
    base_rates_.reserve(num_sources);
    for (std::uint32_t s = 0; s < num_sources; ++s) {
        base_rates_.push_back(rng.lognormal(std::log(50.0), 0.5));
    }
}

std::int64_t NewsSynth::source_tick(std::uint32_t source, std::uint64_t tick_index) {
    if (source >= base_rates_.size()) {
        throw std::out_of_range("news source index");
    }
    Rng rng = Rng(seed_).fork(0x6e657773ULL + source * 1000003ULL + tick_index);
    // hour-of-day modulation over a 96-tick day (15-minute ticks)
    const double hour = static_cast<double>(tick_index % 96) / 4.0;
    const double daymod = 1.0 + 0.5 * std::sin(2.0 * 3.141592653589793 * (hour - 9.0) / 24.0);
    const double burst = rng.lognormal(0.0, 0.3);
    const double value = base_rates_[source] * daymod * burst;
    return static_cast<std::int64_t>(std::llround(std::max(0.0, value)));
}

std::vector<std::int64_t> NewsSynth::tick(std::uint64_t tick_index) {
    std::vector<std::int64_t> out(base_rates_.size());
    for (std::uint32_t s = 0; s < base_rates_.size(); ++s) {
        out[s] = source_tick(s, tick_index);
    }
    return out;
}

dias::PossibleStates derive_possible_states(std::span<const double> window, std::size_t k,
                                            std::size_t window_size, Rng& rng) {
    if (window.empty()) {
        throw std::invalid_argument("derive_possible_states: empty window");
    }
    if (k == 0) {
        throw std::invalid_argument("derive_possible_states: k must be positive");
    }
    const std::size_t take = std::min(window.size(), window_size);
    const std::span<const double> tail = window.subspan(window.size() - take);

    std::set<double> chosen;
    if (tail.size() <= k) {
        chosen.insert(tail.begin(), tail.end());
    } else {
        // uniform sample of k indices without replacement
        std::vector<std::size_t> indices(tail.size());
        for (std::size_t i = 0; i < indices.size(); ++i) {
            indices[i] = i;
        }
        rng.shuffle(indices);
        for (std::size_t i = 0; i < k; ++i) {
            chosen.insert(tail[indices[i]]);
        }
    }

    // Deduplication padding: nearest +/- integer offsets around the values
    // already present.
    std::uint64_t offset = 1;
    while (chosen.size() < k) {
        const std::vector<double> base(chosen.begin(), chosen.end());
        for (const double v : base) {
            if (chosen.size() >= k) {
                break;
            }
            chosen.insert(v + static_cast<double>(offset));
            if (chosen.size() >= k) {
                break;
            }
            chosen.insert(v - static_cast<double>(offset));
        }
        ++offset;
    }

    dias::PossibleStates states;
    states.states.assign(chosen.begin(), chosen.end());
    if (states.states.size() > k) {
        states.states.resize(k);
    }
    states.validate();
    return states;
}

NewsFetch fetch_news_counts(const std::string& endpoint, std::uint32_t num_sources) {
    NewsFetch out;
    const std::size_t scheme = endpoint.find("://");
    std::string rest = scheme == std::string::npos ? endpoint : endpoint.substr(scheme + 3);
    const std::size_t slash = rest.find('/');
    const std::string host_port = slash == std::string::npos ? rest : rest.substr(0, slash);
    const std::string path = slash == std::string::npos ? "/" : rest.substr(slash);

    httplib::Client client(("http://" + host_port).c_str());
    client.set_connection_timeout(2, 0);
    client.set_read_timeout(2, 0);
    auto res = client.Get(path.c_str());
    if (!res || res->status != 200) {
        out.error = res ? "http status " + std::to_string(res->status) : "unreachable";
        return out;
    }
    std::vector<std::int64_t> counts(num_sources, -1);
    for (const auto& line : split(res->body, '\n')) {
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        const auto parts = split(t, ',');
        if (parts.size() != 2) {
            out.error = "malformed line: " + t;
            return out;
        }
        const auto id = parse_u64(trim(parts[0]));
        const auto count = parse_i64(trim(parts[1]));
        if (!id || !count || *id >= num_sources) {
            out.error = "malformed line: " + t;
            return out;
        }
        counts[*id] = *count;
    }
    for (const auto c : counts) {
        if (c < 0) {
            out.error = "missing sources in response";
            return out;
        }
    }
    out.ok = true;
    out.counts = std::move(counts);
    return out;
}

StreamTick stream_tick(const NewsStreamSpec& spec, std::uint64_t tick_index,
                       const std::vector<std::int64_t>& last) {
    StreamTick out;
    if (spec.endpoint.empty()) {
        NewsSynth synth(spec.seed, spec.num_sources);
        out.ok = true;
        out.counts = synth.tick(tick_index);
        return out;
    }
    NewsFetch fetched = fetch_news_counts(spec.endpoint, spec.num_sources);
    if (fetched.ok) {
        out.ok = true;
        out.counts = std::move(fetched.counts);
        return out;
    }
    if (!last.empty()) {
        out.ok = true;
        out.fallback = true; // endpoint down: reuse the previous values
        out.counts = last;
        return out;
    }
    return out; // no prior value: tick skipped
}

} // namespace meshbed::data
