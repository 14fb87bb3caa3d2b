#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "meshbed/monitor/record.hpp"

namespace meshbed::mon {

// Append-only record store: newline-delimited record file plus an in-memory
// index for queries. An empty path keeps the store memory-only (unit tests).
// Files split at max_file_bytes into <path>, <path>.1, <path>.2, ...
class RecordStore {
public:
    explicit RecordStore(std::string path = {}, std::uint64_t max_file_bytes = 0);
    ~RecordStore();

    RecordStore(const RecordStore&) = delete;
    RecordStore& operator=(const RecordStore&) = delete;

    // Appends a batch atomically; throws on I/O failure.
    void append_batch(const std::vector<LogRecord>& batch);

    struct Filter {
        std::optional<PeerId> agent;
        std::optional<LogKind> kind;
        std::optional<std::string> key;
        std::optional<TimeMs> t_min;
        std::optional<TimeMs> t_max;

        bool matches(const LogRecord& rec) const;
    };

    // Matching records in (ts_ms, agent) order. Throws on t_min > t_max.
    std::vector<LogRecord> query(const Filter& filter) const;

    std::uint64_t committed() const { return committed_; }
    std::uint64_t commit_calls() const { return commit_calls_; }

    // Test hook: force the next `n` append batches to fail.
    void fail_next_appends(int n) { fail_appends_ = n; }

    static std::vector<LogRecord> load_file(const std::string& path);

private:
    void open_segment();

    std::string path_;
    std::uint64_t max_file_bytes_;
    std::vector<LogRecord> records_;
    std::uint64_t committed_ = 0;
    std::uint64_t commit_calls_ = 0;
    std::uint64_t segment_bytes_ = 0;
    int segment_index_ = 0;
    int fail_appends_ = 0;
    int fd_ = -1;
};

} // namespace meshbed::mon
