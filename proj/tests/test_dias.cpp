#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>

#include "meshbed/core/rng.hpp"
#include "meshbed/dias/agent.hpp"
#include "meshbed/dias/aggregation.hpp"
#include "meshbed/dias/bloom.hpp"
#include "meshbed/dias/sampling.hpp"
#include "meshbed/dias/states.hpp"
#include "meshbed/scenario/runner.hpp"
#include "oracles.hpp"

using namespace meshbed;
using namespace meshbed::dias;

TEST_CASE("bloom filter basics") {
    BloomFilter f(256, 3);
    CHECK(!f.contains("anything"));
    f.insert("x");
    CHECK(f.contains("x"));
    CHECK_THROWS(BloomFilter(0, 1));
    CHECK_THROWS(BloomFilter(64, 0));
}

TEST_CASE("bloom filter: no false negatives, measured fpr within budget") {
    BloomFilter f(2048, 4);
    std::vector<std::string> inserted;
    for (int i = 0; i < 100; ++i) {
        inserted.push_back("member-" + std::to_string(i));
        f.insert(inserted.back());
    }
    for (const auto& item : inserted) {
        REQUIRE(f.contains(item)); // soundness: never a false negative
    }
    std::uint64_t false_positives = 0;
    const std::uint64_t trials = 100000;
    for (std::uint64_t i = 0; i < trials; ++i) {
        if (f.contains("negative-" + std::to_string(i))) {
            ++false_positives;
        }
    }
    const double measured = static_cast<double>(false_positives) / trials;
    const double analytic = BloomFilter::expected_fpr(2048, 4, 100);
    CHECK(analytic == doctest::Approx(0.001).epsilon(0.35)); // ~0.1%
    CHECK(measured <= 0.005);
}

TEST_CASE("summarize maps raw values to the nearest state") {
    PossibleStates states;
    states.states = {10.0, 20.0};
    states.validate();
    CHECK(summarize(10.0, states) == 0); // exact hit
    CHECK(summarize(20.0, states) == 1);
    CHECK(summarize(14.0, states) == 0); // |14-10| < |14-20|
    CHECK(summarize(15.0, states) == 0); // tie -> lower value
    CHECK(summarize(15.0001, states) == 1);
    CHECK_THROWS(summarize(1.0, PossibleStates{}));

    PossibleStates unsorted;
    unsorted.states = {3.0, 1.0};
    CHECK_THROWS(unsorted.validate());
    PossibleStates dup;
    dup.states = {1.0, 1.0};
    CHECK_THROWS(dup.validate());
}

TEST_CASE("peer view merge: bound, dedupe with min age, self exclusion") {
    PeerView view;
    view.capacity = 4;
    const auto self = NetworkAddress::sim(1);
    std::vector<PeerView::Entry> incoming;
    for (std::uint64_t i = 2; i <= 8; ++i) {
        incoming.push_back({NetworkAddress::sim(i), i});
    }
    incoming.push_back({self, 0}); // must never enter own view
    view.merge(incoming, self);
    CHECK(view.entries.size() == 4);
    CHECK(!view.contains(self));
    // freshest (lowest age) kept: 2,3,4,5
    for (std::uint64_t i = 2; i <= 5; ++i) {
        CHECK(view.contains(NetworkAddress::sim(i)));
    }

    // duplicate address keeps the minimum age
    view.merge({{NetworkAddress::sim(2), 99}}, self);
    for (const auto& e : view.entries) {
        if (e.address == NetworkAddress::sim(2)) {
            CHECK(e.age == 2);
        }
    }
}

TEST_CASE("peer view oldest selection and exchange half") {
    PeerView view;
    view.capacity = 10;
    view.entries = {{NetworkAddress::sim(2), 5},
                    {NetworkAddress::sim(3), 9},
                    {NetworkAddress::sim(4), 1}};
    CHECK(view.oldest() == NetworkAddress::sim(3));

    const auto half = view.exchange_half(NetworkAddress::sim(1));
    // age-descending half (2 of 3) plus self at age 0
    REQUIRE(half.size() == 3);
    CHECK(half[0].address == NetworkAddress::sim(3));
    CHECK(half[1].address == NetworkAddress::sim(2));
    CHECK(half[2].address == NetworkAddress::sim(1));
    CHECK(half[2].age == 0);

    PeerView empty;
    CHECK(!empty.oldest());

    const std::string encoded = encode_view_entries(half);
    const auto decoded = decode_view_entries(encoded);
    REQUIRE(decoded);
    CHECK(decoded->size() == 3);
    CHECK((*decoded)[0].address == NetworkAddress::sim(3));
    CHECK(!decode_view_entries("garbage"));
}

TEST_CASE("session message wire format") {
    SessionMessage msg;
    msg.supplier = 42;
    msg.version = 7;
    msg.state_index = 3;
    msg.value = 123.5;
    msg.prev_version = 6;
    msg.prev_value = 120.0;
    CHECK(msg.encode() == "42;7;3;123.5;6;120");
    const auto back = SessionMessage::decode(msg.encode());
    REQUIRE(back);
    CHECK(back->supplier == 42);
    CHECK(back->value == 123.5);
    CHECK(!SessionMessage::decode("1;2;3"));
}

TEST_CASE("aggregation sessions: add, duplicate, corrective, regression") {
    AggregationState state(2048, 4);

    SessionMessage s5{5, 1, 0, 5.0, 0, 0.0};
    CHECK(state.apply_session(s5) == SessionOutcome::Added);
    CHECK(state.sum() == 5.0);
    CHECK(state.count() == 1);

    // replayed session: duplicate-insensitive no-op
    CHECK(state.apply_session(s5) == SessionOutcome::Duplicate);
    CHECK(state.sum() == 5.0);
    CHECK(state.count() == 1);

    SessionMessage s7{7, 1, 0, 7.0, 0, 0.0};
    SessionMessage s9{9, 1, 0, 9.0, 0, 0.0};
    state.apply_session(s7);
    state.apply_session(s9);
    CHECK(state.sum() == 21.0);

    // corrective update 5 -> 6
    SessionMessage s5b{5, 2, 1, 6.0, 1, 5.0};
    CHECK(state.apply_session(s5b) == SessionOutcome::Corrected);
    CHECK(state.sum() == 22.0);
    CHECK(state.count() == 3);

    // version regression is rejected and logged
    SessionMessage stale{5, 1, 0, 5.0, 0, 0.0};
    CHECK(state.apply_session(stale) == SessionOutcome::Rejected);
    CHECK(state.rejected_regressions() == 1);
    CHECK(state.sum() == 22.0);
}

TEST_CASE("graceful leave subtracts; unknown leave is a no-op; crash rejoin corrects") {
    AggregationState state(2048, 4);
    state.apply_session({5, 1, 0, 5.0, 0, 0.0});
    state.apply_session({7, 1, 0, 7.0, 0, 0.0});
    state.apply_session({9, 1, 0, 9.0, 0, 0.0});
    CHECK(state.sum() == 21.0);

    CHECK(state.handle_leave(9, 1));
    CHECK(state.sum() == 12.0);
    CHECK(state.count() == 2);

    CHECK(!state.handle_leave(1234, 1)); // unknown supplier

    // stale replay from before the leave stays out
    CHECK(state.apply_session({9, 1, 0, 9.0, 0, 0.0}) == SessionOutcome::Rejected);
    // rejoin with a bumped version re-enters
    CHECK(state.apply_session({9, 2, 0, 9.5, 1, 9.0}) == SessionOutcome::Added);
    CHECK(state.sum() == doctest::Approx(21.5));

    // crash (no leave message): value persists, rejoin with higher version
    // applies the corrective path
    AggregationState crash(2048, 4);
    crash.apply_session({5, 1, 0, 5.0, 0, 0.0});
    crash.apply_session({5, 9, 0, 6.0, 1, 5.0});
    CHECK(crash.sum() == 6.0);
    CHECK(crash.count() == 1);
}

TEST_CASE("estimates expose sum/avg/min/max/count; empty flags undefined avg") {
    AggregationState state(2048, 4);
    const auto empty = state.estimate(50);
    CHECK(empty.count == 0);
    CHECK(!empty.avg_defined);

    state.apply_session({1, 1, 0, 5.0, 0, 0.0});
    state.apply_session({2, 1, 0, 7.0, 0, 0.0});
    state.apply_session({3, 1, 0, 9.0, 0, 0.0});
    const auto est = state.estimate(99);
    CHECK(est.sum == 21.0);
    CHECK(est.avg == doctest::Approx(7.0));
    CHECK(est.min == 5.0);
    CHECK(est.max == 9.0);
    CHECK(est.count == 3);
    CHECK(est.as_of == 99);
    CHECK(est.avg_defined);
}

TEST_CASE("duplicate insensitivity: any replayed interleaving matches the dedup state") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        // base sequence of sessions from 4 suppliers with growing versions
        std::vector<SessionMessage> base;
        std::map<std::uint64_t, std::uint64_t> version;
        std::map<std::uint64_t, double> last_value;
        for (int i = 0; i < 12; ++i) {
            const std::uint64_t supplier = 1 + rng.uniform_u64(4);
            const double value = std::floor(rng.uniform_real() * 50.0);
            SessionMessage msg;
            msg.supplier = supplier;
            msg.version = ++version[supplier];
            msg.value = value;
            msg.prev_version = msg.version - 1;
            msg.prev_value = last_value[supplier];
            last_value[supplier] = value;
            base.push_back(msg);
        }
        AggregationState reference(2048, 4);
        for (const auto& msg : base) {
            reference.apply_session(msg);
        }
        // replay with random duplicate prefixes stitched in (old versions
        // replayed later must not change anything)
        AggregationState replayed(2048, 4);
        for (std::size_t i = 0; i < base.size(); ++i) {
            replayed.apply_session(base[i]);
            const std::size_t replay_upto = rng.uniform_u64(i + 1);
            for (std::size_t j = 0; j <= replay_upto; ++j) {
                replayed.apply_session(base[j]);
            }
        }
        CHECK(replayed.sum() == reference.sum());
        CHECK(replayed.count() == reference.count());
        CHECK(replayed.contributions() == reference.contributions());
    }
}

namespace {

scenario::ScenarioConfig dias_cfg(std::uint32_t agents, std::uint64_t seed,
                                  const std::string& states_mode, TimeMs duration) {
    scenario::ScenarioConfig cfg;
    cfg.service = scenario::ServiceChoice::Dias;
    cfg.seed = seed;
    cfg.duration_ms = duration;
    cfg.dias.agents = agents;
    cfg.dias.states_mode = states_mode;
    return cfg;
}

} // namespace

TEST_CASE("static states: every agent converges to the oracle sum exactly") {
    // 20 agents, lockstep SIM; the bound is 50 gossip periods (5000 virtual
    // ms) after service start.
    auto cfg = dias_cfg(20, 2024, "static", 7000);
    auto s = scenario::build_sim_scenario(cfg);
    scenario::run_sim_scenario(s);

    // oracle: central replay over the supplier state history from the logs
    std::vector<oracle::SupplierEvent> events;
    mon::RecordStore::Filter f;
    f.kind = mon::LogKind::Service;
    f.key = "sel";
    for (const auto& rec : s.store->query(f)) {
        const auto parts = split(rec.value, ',');
        REQUIRE(parts.size() == 3);
        events.push_back(
            oracle::SupplierEvent{rec.ts_ms, rec.agent, *parse_double(parts[2]), true});
    }
    const auto oracle_final = oracle::dias_replay(events, cfg.duration_ms);
    REQUIRE(oracle_final.count == 20);

    std::uint64_t converged = 0;
    for (std::uint32_t i = 0; i < cfg.dias.agents; ++i) {
        auto* agent = s.rt->peer(scenario::ids::kDiasAgentBase + i)
                          .find_peerlet<DiasAgentPeerlet>();
        REQUIRE(agent != nullptr);
        CHECK(agent->consumer().sum() == oracle_final.sum); // exact, not approx
        CHECK(agent->consumer().count() == 20);
        converged += agent->consumer().sum() == oracle_final.sum ? 1 : 0;
    }
    CHECK(converged == 20);

    // convergence bound: find the first sample where every agent's logged
    // estimate equals the oracle sum
    f.key = "est";
    std::map<PeerId, std::vector<std::pair<TimeMs, double>>> est;
    for (const auto& rec : s.store->query(f)) {
        const auto parts = split(rec.value, ',');
        est[rec.agent].emplace_back(rec.ts_ms, *parse_double(parts[0]));
    }
    REQUIRE(est.size() == 20);
    TimeMs all_converged_at = -1;
    for (TimeMs t = 200; t <= cfg.duration_ms; t += 200) {
        bool all = true;
        for (const auto& [agent, series] : est) {
            double latest = std::numeric_limits<double>::quiet_NaN();
            for (const auto& [ts, v] : series) {
                if (ts > t) break;
                latest = v;
            }
            if (!(latest == oracle_final.sum)) {
                all = false;
                break;
            }
        }
        if (all) {
            all_converged_at = t;
            break;
        }
    }
    REQUIRE(all_converged_at > 0);
    CHECK(all_converged_at <= 5000 + 1000); // 50 gossip periods + startup slack
}

TEST_CASE("gossip reachability: every agent appears in someone else's view") {
    auto cfg = dias_cfg(20, 5, "static", 3000);
    auto s = scenario::build_sim_scenario(cfg);
    scenario::run_sim_scenario(s);

    std::set<std::string> seen;
    for (std::uint32_t i = 0; i < cfg.dias.agents; ++i) {
        auto* agent = s.rt->peer(scenario::ids::kDiasAgentBase + i)
                          .find_peerlet<DiasAgentPeerlet>();
        CHECK(agent->view().entries.size() <= cfg.dias.view_size);
        for (const auto& e : agent->view().entries) {
            seen.insert(e.address.to_string());
        }
    }
    for (std::uint32_t i = 0; i < cfg.dias.agents; ++i) {
        const auto addr = NetworkAddress::sim(scenario::ids::kDiasAgentBase + i);
        CHECK(seen.count(addr.to_string()) == 1);
    }
}

TEST_CASE("graceful leave and rejoin propagate through live consumers") {
    auto cfg = dias_cfg(6, 31, "static", 9000);
    auto s = scenario::build_sim_scenario(cfg);

    // take agent ordinal 2 offline at t=4000, back at t=6000
    FieldRecord leave;
    leave.set("cmd", "leave");
    FieldRecord join;
    join.set("cmd", "join");
    s.rt->at(4000, [&] {
        s.rt->peer(scenario::ids::kHarness)
            .send(NetworkAddress::sim(scenario::ids::kDiasDeviceBase + 2),
                  msg::kChangeCommand, leave.encode());
    });
    s.rt->at(6000, [&] {
        s.rt->peer(scenario::ids::kHarness)
            .send(NetworkAddress::sim(scenario::ids::kDiasDeviceBase + 2),
                  msg::kChangeCommand, join.encode());
    });
    scenario::run_sim_scenario(s);

    // collect supplier values from the logs
    mon::RecordStore::Filter f;
    f.kind = mon::LogKind::Service;
    f.key = "sel";
    std::map<PeerId, double> value_of;
    for (const auto& rec : s.store->query(f)) {
        const auto parts = split(rec.value, ',');
        value_of[rec.agent] = *parse_double(parts[2]);
    }
    REQUIRE(value_of.size() == 6);
    double full_sum = 0.0;
    for (const auto& [agent, v] : value_of) {
        full_sum += v;
    }
    const PeerId left = scenario::ids::kDiasAgentBase + 2;

    // while agent 2 was away, the others' consumers excluded its value
    mon::RecordStore::Filter est;
    est.kind = mon::LogKind::Service;
    est.key = "est";
    est.t_min = 5500;
    est.t_max = 5900;
    for (const auto& rec : s.store->query(est)) {
        if (rec.agent == left) {
            continue;
        }
        const double sum = *parse_double(split(rec.value, ',')[0]);
        CHECK(sum == doctest::Approx(full_sum - value_of[left]));
    }

    // after rejoin everyone sees the full sum again
    std::uint32_t recovered = 0;
    for (std::uint32_t i = 0; i < cfg.dias.agents; ++i) {
        auto* agent = s.rt->peer(scenario::ids::kDiasAgentBase + i)
                          .find_peerlet<DiasAgentPeerlet>();
        if (agent->consumer().sum() == doctest::Approx(full_sum)) {
            ++recovered;
        }
    }
    CHECK(recovered == cfg.dias.agents);
}
