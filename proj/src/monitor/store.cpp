#include "meshbed/monitor/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "meshbed/core/encoding.hpp"

namespace meshbed::mon {

std::string_view kind_name(LogKind kind) {
    switch (kind) {
    case LogKind::Service: return "SERVICE";
    case LogKind::Event: return "EVENT";
    case LogKind::Memory: return "MEMORY";
    }
    return "?";
}

std::optional<LogKind> kind_from_name(std::string_view name) {
    if (name == "SERVICE") return LogKind::Service;
    if (name == "EVENT") return LogKind::Event;
    if (name == "MEMORY") return LogKind::Memory;
    return std::nullopt;
}

std::string format_record_line(const LogRecord& rec) {
    std::string out = std::to_string(rec.ts_ms);
    out += '|';
    out += std::to_string(rec.agent);
    out += '|';
    out += kind_name(rec.kind);
    out += '|';
    out += percent_encode(rec.key, "|");
    out += '|';
    out += percent_encode(rec.value, "|");
    return out;
}

std::optional<LogRecord> parse_record_line(std::string_view line) {
    const auto parts = split(line, '|');
    if (parts.size() != 5) {
        return std::nullopt;
    }
    LogRecord rec;
    const auto ts = parse_i64(parts[0]);
    const auto agent = parse_u64(parts[1]);
    const auto kind = kind_from_name(parts[2]);
    const auto key = percent_decode(parts[3]);
    const auto value = percent_decode(parts[4]);
    if (!ts || !agent || !kind || !key || !value) {
        return std::nullopt;
    }
    rec.ts_ms = *ts;
    rec.agent = *agent;
    rec.kind = *kind;
    rec.key = *key;
    rec.value = *value;
    return rec;
}

RecordStore::RecordStore(std::string path, std::uint64_t max_file_bytes)
    : path_(std::move(path)), max_file_bytes_(max_file_bytes) {
    if (!path_.empty()) {
        open_segment();
    }
}

RecordStore::~RecordStore() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

void RecordStore::open_segment() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
    const std::string name =
        segment_index_ == 0 ? path_ : path_ + "." + std::to_string(segment_index_);
    fd_ = ::open(name.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd_ < 0) {
        throw std::runtime_error("cannot open record store: " + name);
    }
    segment_bytes_ = 0;
}

void RecordStore::append_batch(const std::vector<LogRecord>& batch) {
    if (fail_appends_ > 0) {
        --fail_appends_;
        throw std::runtime_error("injected store failure");
    }
    if (fd_ >= 0) {
        for (const auto& rec : batch) {
            std::string line = format_record_line(rec);
            line += '\n';
            if (max_file_bytes_ > 0 && segment_bytes_ > 0 &&
                segment_bytes_ + line.size() > max_file_bytes_) {
                ++segment_index_;
                open_segment();
            }
            ssize_t off = 0;
            while (off < static_cast<ssize_t>(line.size())) {
                const ssize_t n = ::write(fd_, line.data() + off, line.size() - off);
                if (n < 0) {
                    throw std::runtime_error("record store write failed");
                }
                off += n;
            }
            segment_bytes_ += line.size();
        }
    }
    records_.insert(records_.end(), batch.begin(), batch.end());
    committed_ += batch.size();
    ++commit_calls_;
}

bool RecordStore::Filter::matches(const LogRecord& rec) const {
    if (agent && rec.agent != *agent) return false;
    if (kind && rec.kind != *kind) return false;
    if (key && rec.key != *key) return false;
    if (t_min && rec.ts_ms < *t_min) return false;
    if (t_max && rec.ts_ms > *t_max) return false;
    return true;
}

std::vector<LogRecord> RecordStore::query(const Filter& filter) const {
    if (filter.t_min && filter.t_max && *filter.t_min > *filter.t_max) {
        throw std::invalid_argument("malformed time range");
    }
    std::vector<LogRecord> out;
    for (const auto& rec : records_) {
        if (filter.matches(rec)) {
            out.push_back(rec);
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const LogRecord& a, const LogRecord& b) {
        if (a.ts_ms != b.ts_ms) return a.ts_ms < b.ts_ms;
        return a.agent < b.agent;
    });
    return out;
}

std::vector<LogRecord> RecordStore::load_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot read record store: " + path);
    }
    std::vector<LogRecord> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) {
            continue;
        }
        auto rec = parse_record_line(line);
        if (!rec) {
            throw std::runtime_error("malformed record line: " + line);
        }
        out.push_back(std::move(*rec));
    }
    return out;
}

} // namespace meshbed::mon
