#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "meshbed/core/encoding.hpp"
#include "meshbed/core/rng.hpp"
#include "meshbed/net/frame.hpp"
#include "meshbed/net/queue.hpp"

using namespace meshbed;

namespace {

Envelope random_envelope(Rng& rng) {
    Envelope env;
    env.msg_type = static_cast<std::uint16_t>(rng.uniform_u64(0x10000));
    env.seq = rng.next_u64();
    if (rng.bernoulli(0.5)) {
        env.sender = NetworkAddress::sim(rng.uniform_u64(1000));
    } else {
        env.sender = NetworkAddress::tcp("10.0.0." + std::to_string(rng.uniform_u64(255)),
                                         static_cast<std::uint16_t>(rng.uniform_u64(0x10000)));
    }
    if (rng.bernoulli(0.5)) {
        env.recipient = NetworkAddress::sim(rng.uniform_u64(1000));
    } else {
        env.recipient = NetworkAddress::tcp("host" + std::to_string(rng.uniform_u64(99)),
                                            static_cast<std::uint16_t>(rng.uniform_u64(0x10000)));
    }
    const std::size_t len = rng.uniform_u64(256);
    env.body.resize(len);
    for (auto& c : env.body) {
        c = static_cast<char>(rng.uniform_u64(256));
    }
    return env;
}

} // namespace

TEST_CASE("frame layout matches the hand-computed reference bytes") {
    // msg_type=0, seq=0, empty addresses and body: 4-byte length (14) then
    // 14 zero payload bytes.
    Envelope env;
    const std::string frame = encode_frame(env);
    REQUIRE(frame.size() == 18);
    const std::string expected = {0x00, 0x00, 0x00, 0x0E, 0x00, 0x00, 0x00, 0x00, 0x00,
                                  0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00};
    CHECK(frame == expected);
}

TEST_CASE("frame field widths") {
    Envelope env;
    env.msg_type = 0x0102;
    env.seq = 0x1122334455667788ULL;
    env.sender = NetworkAddress::sim(7);
    env.recipient = NetworkAddress::tcp("h", 80);
    env.body = "abc";
    const std::string frame = encode_frame(env);
    const std::string sender = "sim:7";
    const std::string recipient = "h:80";
    REQUIRE(frame.size() == 4 + 2 + 8 + 2 + sender.size() + 2 + recipient.size() + 3);
    CHECK(static_cast<unsigned char>(frame[4]) == 0x01);
    CHECK(static_cast<unsigned char>(frame[5]) == 0x02);
    CHECK(static_cast<unsigned char>(frame[6]) == 0x11);
    CHECK(static_cast<unsigned char>(frame[13]) == 0x88);
    const Envelope back = decode_frame(frame);
    CHECK(back == env);
}

TEST_CASE("decode(encode(x)) == x over randomized envelopes") {
    Rng rng(2024);
    for (int i = 0; i < 10000; ++i) {
        const Envelope env = random_envelope(rng);
        const Envelope back = decode_frame(encode_frame(env));
        REQUIRE(back == env);
    }
}

TEST_CASE("truncated frames raise 'incomplete frame'") {
    Envelope env;
    env.msg_type = 5;
    env.sender = NetworkAddress::sim(1);
    env.recipient = NetworkAddress::sim(2);
    env.body = "payload";
    const std::string frame = encode_frame(env);
    for (std::size_t cut = 4; cut < frame.size(); ++cut) {
        CHECK_THROWS_WITH_AS(decode_frame(frame.substr(0, cut)), "incomplete frame",
                             FrameError);
    }
}

TEST_CASE("oversize body is rejected") {
    Envelope env;
    env.body.resize(kMaxBodyBytes + 1);
    CHECK_THROWS_AS(encode_frame(env), FrameError);
}

TEST_CASE("incremental decoder reassembles split frames") {
    Rng rng(7);
    std::string stream;
    std::vector<Envelope> sent;
    for (int i = 0; i < 50; ++i) {
        sent.push_back(random_envelope(rng));
        stream += encode_frame(sent.back());
    }
    FrameDecoder dec;
    std::vector<Envelope> got;
    std::size_t pos = 0;
    while (pos < stream.size()) {
        const std::size_t n = 1 + rng.uniform_u64(13);
        dec.feed(std::string_view(stream).substr(pos, n));
        pos += n;
        while (auto env = dec.next()) {
            got.push_back(*env);
        }
    }
    CHECK(got == sent);
    CHECK(dec.buffered() == 0);
}

TEST_CASE("address string round trip") {
    const auto a = NetworkAddress::tcp("127.0.0.1", 9000);
    CHECK(a.to_string() == "127.0.0.1:9000");
    CHECK(NetworkAddress::parse("127.0.0.1:9000") == a);
    const auto s = NetworkAddress::sim(42);
    CHECK(s.to_string() == "sim:42");
    CHECK(NetworkAddress::parse("sim:42") == s);
    CHECK(!NetworkAddress::parse("no-port"));
    CHECK(!NetworkAddress::parse(":9"));
    CHECK(!NetworkAddress::parse("h:99999"));
}

TEST_CASE("queue keeps FIFO order and enforces capacity") {
    MessageQueue q(2, DropPolicy::DropNewest);
    Envelope e1, e2, e3;
    e1.seq = 1;
    e2.seq = 2;
    e3.seq = 3;
    CHECK(q.push(e1));
    CHECK(q.push(e2));
    CHECK(!q.push(e3)); // capacity 2: newest dropped
    CHECK(q.dropped() == 1);
    CHECK(q.size() == 2);
    CHECK(q.pop()->seq == 1);
    CHECK(q.pop()->seq == 2);
    CHECK(!q.pop());
}

TEST_CASE("percent encoding round trip") {
    const std::string raw = "a,b|c%d\ne=f";
    const std::string enc = percent_encode(raw, ",|=");
    CHECK(enc.find(',') == std::string::npos);
    CHECK(enc.find('|') == std::string::npos);
    CHECK(enc.find('\n') == std::string::npos);
    CHECK(percent_decode(enc) == raw);
    CHECK(!percent_decode("%zz"));
    CHECK(!percent_decode("%1"));
}

TEST_CASE("field record round trip") {
    FieldRecord rec;
    rec.set("servInfo", "epos");
    rec.set("devInfo.location", "zurich=west\n");
    rec.set_u64("count", 42);
    rec.set_f64("x", 0.1);
    const std::string text = rec.encode();
    const auto back = FieldRecord::decode(text);
    REQUIRE(back);
    CHECK(back->get("servInfo") == "epos");
    CHECK(back->get("devInfo.location") == "zurich=west\n");
    CHECK(back->get_u64("count") == 42);
    CHECK(back->get_f64("x") == 0.1);
    CHECK(!back->get("missing"));
}
