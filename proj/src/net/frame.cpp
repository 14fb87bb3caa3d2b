#include "meshbed/net/frame.hpp"

#include <cstring>

namespace meshbed {

namespace {

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
    put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffULL));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::uint16_t u16() {
        need(2);
        const auto hi = static_cast<unsigned char>(bytes_[pos_]);
        const auto lo = static_cast<unsigned char>(bytes_[pos_ + 1]);
        pos_ += 2;
        return static_cast<std::uint16_t>((hi << 8) | lo);
    }

    std::uint32_t u32() {
        const std::uint32_t hi = u16();
        const std::uint32_t lo = u16();
        return (hi << 16) | lo;
    }

    std::uint64_t u64() {
        const std::uint64_t hi = u32();
        const std::uint64_t lo = u32();
        return (hi << 32) | lo;
    }

    std::string bytes(std::size_t n) {
        need(n);
        std::string out(bytes_.substr(pos_, n));
        pos_ += n;
        return out;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) {
            throw FrameError("incomplete frame");
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

Envelope decode_payload(std::string_view payload) {
    Reader r(payload);
    Envelope env;
    env.msg_type = r.u16();
    env.seq = r.u64();
    const std::uint16_t sender_len = r.u16();
    const std::string sender = r.bytes(sender_len);
    const std::uint16_t recipient_len = r.u16();
    const std::string recipient = r.bytes(recipient_len);
    env.body = r.bytes(r.remaining());

    if (!sender.empty()) {
        auto parsed = NetworkAddress::parse(sender);
        if (!parsed) {
            throw FrameError("bad sender address: " + sender);
        }
        env.sender = *parsed;
    }
    if (!recipient.empty()) {
        auto parsed = NetworkAddress::parse(recipient);
        if (!parsed) {
            throw FrameError("bad recipient address: " + recipient);
        }
        env.recipient = *parsed;
    }
    return env;
}

} // namespace

std::string encode_frame(const Envelope& env) {
    if (env.body.size() > kMaxBodyBytes) {
        throw FrameError("body exceeds 16 MiB");
    }
    const std::string sender =
        env.sender == NetworkAddress{} ? std::string{} : env.sender.to_string();
    const std::string recipient =
        env.recipient == NetworkAddress{} ? std::string{} : env.recipient.to_string();
    if (sender.size() > 0xffff || recipient.size() > 0xffff) {
        throw FrameError("address too long");
    }

    const std::size_t payload_len =
        2 + 8 + 2 + sender.size() + 2 + recipient.size() + env.body.size();

    std::string out;
    out.reserve(4 + payload_len);
    put_u32(out, static_cast<std::uint32_t>(payload_len));
    put_u16(out, env.msg_type);
    put_u64(out, env.seq);
    put_u16(out, static_cast<std::uint16_t>(sender.size()));
    out.append(sender);
    put_u16(out, static_cast<std::uint16_t>(recipient.size()));
    out.append(recipient);
    out.append(env.body);
    return out;
}

Envelope decode_frame(std::string_view bytes) {
    Reader r(bytes);
    const std::uint32_t payload_len = r.u32();
    if (payload_len > 4 + kMaxBodyBytes + 2 * 0x10000) {
        throw FrameError("frame too large");
    }
    const std::string payload = r.bytes(payload_len);
    return decode_payload(payload);
}

std::optional<Envelope> FrameDecoder::next() {
    if (buffer_.size() < 4) {
        return std::nullopt;
    }
    const auto b = [this](std::size_t i) {
        return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer_[i]));
    };
    const std::uint32_t payload_len = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
    if (payload_len > 4 + kMaxBodyBytes + 2 * 0x10000) {
        throw FrameError("frame too large");
    }
    if (buffer_.size() < 4 + static_cast<std::size_t>(payload_len)) {
        return std::nullopt;
    }
    Envelope env = decode_payload(std::string_view(buffer_).substr(4, payload_len));
    buffer_.erase(0, 4 + payload_len);
    return env;
}

} // namespace meshbed
