#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace meshbed {

// Percent-encodes '%', control characters, and every byte in `reserved`.
// Each file/wire format passes its own delimiter set.
std::string percent_encode(std::string_view raw, std::string_view reserved);

// Strict decode; returns nullopt on malformed escapes.
std::optional<std::string> percent_decode(std::string_view encoded);

// "key=value" lines, values percent-encoded. Used by the bootstrap protocol
// bodies and other structured-text payloads. Keys keep insertion order and
// may repeat.
class FieldRecord {
public:
    void set(std::string_view key, std::string_view value);
    void set_u64(std::string_view key, std::uint64_t value);
    void set_f64(std::string_view key, double value);

    bool has(std::string_view key) const;
    std::optional<std::string> get(std::string_view key) const;
    std::optional<std::uint64_t> get_u64(std::string_view key) const;
    std::optional<double> get_f64(std::string_view key) const;
    std::vector<std::string> get_all(std::string_view key) const;

    std::string encode() const;
    static std::optional<FieldRecord> decode(std::string_view text);

    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Round-trip-exact decimal formatting (max_digits10) for doubles that land in
// text files which later feed back into computations.
std::string format_double(double v);

std::optional<double> parse_double(std::string_view s);
std::optional<std::uint64_t> parse_u64(std::string_view s);
std::optional<std::int64_t> parse_i64(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);

} // namespace meshbed
