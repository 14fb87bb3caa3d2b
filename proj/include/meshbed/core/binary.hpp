#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace meshbed {

// Big-endian binary payload helpers for service-internal messages. Doubles
// travel as raw IEEE-754 bits so values stay bit-exact between SIM and LIVE.
class BinaryWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }

    void u32(std::uint32_t v) {
        for (int shift = 24; shift >= 0; shift -= 8) {
            out_.push_back(static_cast<char>((v >> shift) & 0xff));
        }
    }

    void u64(std::uint64_t v) {
        u32(static_cast<std::uint32_t>(v >> 32));
        u32(static_cast<std::uint32_t>(v));
    }

    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void f64_vec(std::span<const double> values) {
        u32(static_cast<std::uint32_t>(values.size()));
        for (const double v : values) {
            f64(v);
        }
    }

    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::string_view bytes) : bytes_(bytes) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v = (v << 8) | static_cast<unsigned char>(bytes_[pos_++]);
        }
        return v;
    }

    std::uint64_t u64() {
        const std::uint64_t hi = u32();
        return (hi << 32) | u32();
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::vector<double> f64_vec() {
        const std::uint32_t n = u32();
        need(static_cast<std::size_t>(n) * 8);
        std::vector<double> out(n);
        for (auto& v : out) {
            v = f64();
        }
        return out;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) {
            throw std::runtime_error("truncated binary payload");
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

} // namespace meshbed
