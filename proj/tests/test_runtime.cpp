#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <memory>
#include <string>
#include <vector>

#include "meshbed/runtime/peer.hpp"
#include "meshbed/runtime/sim_runtime.hpp"

using namespace meshbed;

namespace {

struct LifecycleCounts {
    int init = 0;
    int started = 0;
    int stopped = 0;
};

// Scripted peerlet used across the runtime tests: records lifecycle calls,
// timer fires and deliveries, and can echo messages back.
class Probe : public Peerlet {
public:
    struct Shared {
        LifecycleCounts counts;
        std::vector<TimerId> timers;
        std::vector<Envelope> messages;
    };

    explicit Probe(std::shared_ptr<Shared> shared, bool echo = false)
        : shared_(std::move(shared)), echo_(echo) {}

    std::string_view name() const override { return "probe"; }

    void init(Peer& peer) override {
        Peerlet::init(peer);
        ++shared_->counts.init;
    }
    void start() override { ++shared_->counts.started; }
    void stop() override { ++shared_->counts.stopped; }

    bool handle_message(const Envelope& env) override {
        shared_->messages.push_back(env);
        if (echo_) {
            peer_->send(env.sender, env.msg_type, env.body);
        }
        return true;
    }

    void handle_timer(TimerId id) override { shared_->timers.push_back(id); }

private:
    std::shared_ptr<Shared> shared_;
    bool echo_;
};

PeerletFactory probe_factory(std::shared_ptr<Probe::Shared> shared, bool echo = false) {
    return [shared, echo] {
        PeerletList l;
        l.push_back(std::make_unique<Probe>(shared, echo));
        return l;
    };
}

} // namespace

TEST_CASE("create_peer contract") {
    SimRuntime rt;
    auto shared = std::make_shared<Probe::Shared>();
    Peer& p = rt.add_peer(1, probe_factory(shared));
    CHECK(p.state() == PeerState::Init);
    CHECK(shared->counts.init == 1);

    CHECK_THROWS(rt.add_peer(1, probe_factory(shared))); // duplicate id

    CHECK_THROWS(rt.add_peer(2, [] { return PeerletList{}; })); // no peerlets
}

TEST_CASE("mixed-mode peers are rejected") {
    SimRuntime rt;
    auto shared = std::make_shared<Probe::Shared>();
    PeerletList l;
    l.push_back(std::make_unique<Probe>(shared));
    auto live = std::make_unique<Peer>(9, NetworkAddress::tcp("127.0.0.1", 9000),
                                       ExecutionMode::Live, std::move(l), 100,
                                       DropPolicy::BlockSender);
    CHECK_THROWS(rt.adopt_peer(std::move(live)));
}

TEST_CASE("lifecycle callbacks run exactly once per peer lifetime") {
    SimRuntime rt;
    auto shared = std::make_shared<Probe::Shared>();
    rt.add_peer(1, probe_factory(shared));
    rt.start_all();
    rt.run_until(10);
    rt.stop_peer(1);
    CHECK(shared->counts.init == 1);
    CHECK(shared->counts.started == 1);
    CHECK(shared->counts.stopped == 1);
}

TEST_CASE("no callbacks after stop") {
    SimRuntime rt;
    auto a = std::make_shared<Probe::Shared>();
    auto b = std::make_shared<Probe::Shared>();
    rt.add_peer(1, probe_factory(a));
    rt.add_peer(2, probe_factory(b));
    rt.start_all();
    rt.peer(2).schedule_periodic(5);
    rt.at(12, [&] { rt.stop_peer(2); });
    rt.at(13, [&] { rt.peer(1).send(NetworkAddress::sim(2), 7, "late"); });
    rt.run_until(100);
    // periodic timer fired at 5 and 10 only; the late message never lands
    CHECK(b->timers.size() == 2);
    CHECK(b->messages.empty());
    CHECK(rt.counters().dropped == 1);
}

TEST_CASE("restart reuses the id and resets peerlet state") {
    SimRuntime rt;
    auto shared = std::make_shared<Probe::Shared>();
    rt.add_peer(1, probe_factory(shared));
    rt.start_all();
    rt.stop_peer(1);
    rt.restart_peer(1);
    CHECK(rt.peer(1).state() == PeerState::Running);
    CHECK(rt.peer(1).id() == 1);
    // second peerlet generation: fresh init/start, old one saw one stop
    CHECK(shared->counts.init == 2);
    CHECK(shared->counts.started == 2);
    CHECK(shared->counts.stopped == 1);
}

TEST_CASE("timer deadline ordering with id tie-break") {
    SimRuntime rt;
    auto shared = std::make_shared<Probe::Shared>();
    rt.add_peer(1, probe_factory(shared));
    rt.start_all();
    // ids allocate in schedule order; equal deadlines must fire id-ascending
    const TimerId t1 = rt.peer(1).schedule_timer(50);
    const TimerId t2 = rt.peer(1).schedule_timer(50);
    const TimerId t0 = rt.peer(1).schedule_timer(0);
    rt.run_until(100);
    REQUIRE(shared->timers.size() == 3);
    CHECK(shared->timers[0] == t0); // delay 0 before any later deadline
    CHECK(shared->timers[1] == t1);
    CHECK(shared->timers[2] == t2);
    CHECK(t1 < t2);
}

TEST_CASE("periodic timers re-arm until cancelled") {
    SimRuntime rt;
    auto shared = std::make_shared<Probe::Shared>();
    rt.add_peer(1, probe_factory(shared));
    rt.start_all();
    const TimerId t = rt.peer(1).schedule_periodic(100);
    rt.at(350, [&] { rt.peer(1).cancel_timer(t); });
    rt.run_until(1000);
    CHECK(shared->timers == std::vector<TimerId>{t, t, t}); // 100, 200, 300
}

TEST_CASE("timer on a non-running peer is rejected") {
    SimRuntime rt;
    auto shared = std::make_shared<Probe::Shared>();
    rt.add_peer(1, probe_factory(shared));
    CHECK_THROWS(rt.peer(1).schedule_timer(5));
}

TEST_CASE("one message at t=10 appears as exactly one delivery event") {
    SimConfig cfg;
    cfg.delivery_delay_ms = 5;
    SimRuntime rt(cfg);
    auto a = std::make_shared<Probe::Shared>();
    auto b = std::make_shared<Probe::Shared>();
    rt.add_peer(1, probe_factory(a));
    rt.add_peer(2, probe_factory(b));
    rt.start_all();
    rt.at(5, [&] { rt.peer(1).send(NetworkAddress::sim(2), 42, "hi"); });
    rt.run_until(50);
    REQUIRE(b->messages.size() == 1);
    CHECK(b->messages[0].msg_type == 42);

    int deliveries = 0;
    for (const auto& ev : rt.trace().events()) {
        if (ev.kind == TraceEvent::Kind::Delivery) {
            ++deliveries;
            CHECK(ev.ts_ms == 10); // sent at t=5, delay 5
            CHECK(ev.peer == 2);
        }
    }
    CHECK(deliveries == 1);
}

TEST_CASE("per-pair FIFO and strictly increasing seq") {
    SimRuntime rt;
    auto a = std::make_shared<Probe::Shared>();
    auto b = std::make_shared<Probe::Shared>();
    rt.add_peer(1, probe_factory(a));
    rt.add_peer(2, probe_factory(b));
    rt.start_all();
    rt.at(1, [&] {
        rt.peer(1).send(NetworkAddress::sim(2), 1, "m1");
        rt.peer(1).send(NetworkAddress::sim(2), 1, "m2");
        rt.peer(1).send(NetworkAddress::sim(2), 1, "m3");
    });
    rt.run_until(50);
    REQUIRE(b->messages.size() == 3);
    CHECK(b->messages[0].body == "m1");
    CHECK(b->messages[1].body == "m2");
    CHECK(b->messages[2].body == "m3");
    CHECK(b->messages[0].seq < b->messages[1].seq);
    CHECK(b->messages[1].seq < b->messages[2].seq);
}

TEST_CASE("SIM delay: send at t=10 delivers at t=15") {
    SimConfig cfg;
    cfg.delivery_delay_ms = 5;
    SimRuntime rt(cfg);
    auto a = std::make_shared<Probe::Shared>();
    auto b = std::make_shared<Probe::Shared>();
    rt.add_peer(1, probe_factory(a));
    rt.add_peer(2, probe_factory(b));
    rt.start_all();
    rt.at(10, [&] { rt.peer(1).send(NetworkAddress::sim(2), 9, "x"); });
    rt.run_until(14);
    CHECK(b->messages.empty());
    rt.run_until(16);
    CHECK(b->messages.size() == 1);
}

TEST_CASE("identical seed and scenario give byte-identical traces") {
    auto run = [] {
        SimConfig cfg;
        cfg.seed = 77;
        SimRuntime rt(cfg);
        auto a = std::make_shared<Probe::Shared>();
        auto b = std::make_shared<Probe::Shared>();
        rt.add_peer(1, probe_factory(a, true));
        rt.add_peer(2, probe_factory(b, true));
        rt.start_all();
        // ping-pong fed by a periodic timer and a random payload
        rt.at(0, [&rt] {
            rt.peer(1).send(NetworkAddress::sim(2), 3,
                            std::to_string(rt.peer(1).rng().next_u64()));
        });
        rt.run_until(40);
        return rt.trace().serialize();
    };
    const std::string t1 = run();
    const std::string t2 = run();
    CHECK(t1 == t2);
    CHECK(!t1.empty());
}

TEST_CASE("until=0 runs nothing") {
    SimRuntime rt;
    auto a = std::make_shared<Probe::Shared>();
    rt.add_peer(1, probe_factory(a));
    EventTrace trace = run_simulation(rt, 0);
    CHECK(trace.empty());
}

TEST_CASE("queue stats observe pending inbound and drops") {
    SimRuntime rt;
    auto a = std::make_shared<Probe::Shared>();
    rt.add_peer(1, probe_factory(a));
    rt.start_all();
    Peer& p = rt.peer(1);
    CHECK(p.queue_stats().in_len == 0);
    CHECK(p.queue_stats().out_len == 0);
    CHECK(p.queue_stats().dropped_count == 0);

    Envelope env;
    env.recipient = p.address();
    env.sender = NetworkAddress::sim(99);
    for (int i = 0; i < 3; ++i) {
        env.seq = static_cast<std::uint64_t>(i + 1);
        CHECK(p.push_inbound(env));
    }
    CHECK(p.queue_stats().in_len == 3);
    CHECK(p.process_inbound_one());
    CHECK(p.queue_stats().in_len == 2);
}

TEST_CASE("conservation: sent = delivered + dropped in lockstep SIM") {
    SimConfig cfg;
    cfg.drop_policy = DropPolicy::DropNewest;
    SimRuntime rt(cfg);
    auto a = std::make_shared<Probe::Shared>();
    auto b = std::make_shared<Probe::Shared>();
    rt.add_peer(1, probe_factory(a));
    rt.add_peer(2, probe_factory(b));
    rt.start_all();
    rt.at(1, [&] {
        for (int i = 0; i < 20; ++i) {
            rt.peer(1).send(NetworkAddress::sim(2), 1, "x");
        }
    });
    rt.at(3, [&] { rt.stop_peer(2); });
    rt.at(4, [&] {
        for (int i = 0; i < 5; ++i) {
            rt.peer(1).send(NetworkAddress::sim(2), 1, "y");
        }
    });
    rt.run_until(100);
    const auto& c = rt.counters();
    CHECK(c.sent == 25);
    CHECK(c.delivered == 20);
    CHECK(c.dropped == 5);
    CHECK(c.sent == c.delivered + c.dropped);
}
