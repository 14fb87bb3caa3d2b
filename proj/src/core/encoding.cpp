#include "meshbed/core/encoding.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace meshbed {

namespace {

constexpr char kHexDigits[] = "0123456789ABCDEF";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

} // namespace

std::string percent_encode(std::string_view raw, std::string_view reserved) {
    std::string out;
    out.reserve(raw.size());
    for (const char c : raw) {
        const auto uc = static_cast<unsigned char>(c);
        if (c == '%' || uc < 0x20 || uc == 0x7f ||
            reserved.find(c) != std::string_view::npos) {
            out.push_back('%');
            out.push_back(kHexDigits[uc >> 4]);
            out.push_back(kHexDigits[uc & 0xf]);
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::optional<std::string> percent_decode(std::string_view encoded) {
    std::string out;
    out.reserve(encoded.size());
    for (std::size_t i = 0; i < encoded.size(); ++i) {
        if (encoded[i] != '%') {
            out.push_back(encoded[i]);
            continue;
        }
        if (i + 2 >= encoded.size()) {
            return std::nullopt;
        }
        const int hi = hex_value(encoded[i + 1]);
        const int lo = hex_value(encoded[i + 2]);
        if (hi < 0 || lo < 0) {
            return std::nullopt;
        }
        out.push_back(static_cast<char>((hi << 4) | lo));
        i += 2;
    }
    return out;
}

void FieldRecord::set(std::string_view key, std::string_view value) {
    entries_.emplace_back(std::string(key), std::string(value));
}

void FieldRecord::set_u64(std::string_view key, std::uint64_t value) {
    set(key, std::to_string(value));
}

void FieldRecord::set_f64(std::string_view key, double value) {
    set(key, format_double(value));
}

bool FieldRecord::has(std::string_view key) const {
    return get(key).has_value();
}

std::optional<std::string> FieldRecord::get(std::string_view key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) {
            return v;
        }
    }
    return std::nullopt;
}

std::optional<std::uint64_t> FieldRecord::get_u64(std::string_view key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    return parse_u64(*v);
}

std::optional<double> FieldRecord::get_f64(std::string_view key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    return parse_double(*v);
}

std::vector<std::string> FieldRecord::get_all(std::string_view key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_) {
        if (k == key) {
            out.push_back(v);
        }
    }
    return out;
}

std::string FieldRecord::encode() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += percent_encode(k, "=\n");
        out += '=';
        out += percent_encode(v, "=\n");
        out += '\n';
    }
    return out;
}

std::optional<FieldRecord> FieldRecord::decode(std::string_view text) {
    FieldRecord rec;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        const std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            return std::nullopt;
        }
        auto key = percent_decode(line.substr(0, eq));
        auto value = percent_decode(line.substr(eq + 1));
        if (!key || !value) {
            return std::nullopt;
        }
        rec.entries_.emplace_back(std::move(*key), std::move(*value));
    }
    return rec;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::optional<double> parse_double(std::string_view s) {
    double out = 0.0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr != end) {
        return std::nullopt;
    }
    return out;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return out;
}

std::optional<std::int64_t> parse_i64(std::string_view s) {
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(sep, pos);
        if (next == std::string_view::npos) {
            out.emplace_back(s.substr(pos));
            return out;
        }
        out.emplace_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

} // namespace meshbed
