#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "meshbed/core/ids.hpp"

namespace meshbed::mon {

enum class LogKind { Service, Event, Memory };

std::string_view kind_name(LogKind kind);
std::optional<LogKind> kind_from_name(std::string_view name);

struct LogRecord {
    PeerId agent = 0;
    TimeMs ts_ms = 0;
    LogKind kind = LogKind::Service;
    std::string key;
    std::string value;

    bool operator==(const LogRecord&) const = default;
};

// Store line format: ts_ms|agent|kind|key|value ('|' percent-encoded in the
// key/value fields).
std::string format_record_line(const LogRecord& rec);
std::optional<LogRecord> parse_record_line(std::string_view line);

} // namespace meshbed::mon
