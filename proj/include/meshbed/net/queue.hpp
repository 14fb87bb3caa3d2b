#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>

#include "meshbed/net/envelope.hpp"

namespace meshbed {

enum class DropPolicy { BlockSender, DropNewest };

struct QueueStats {
    std::size_t in_len = 0;
    std::size_t out_len = 0;
    std::uint64_t dropped_count = 0;
};

// Bounded FIFO shared by the SIM and LIVE transports. Thread-safe; SIM only
// ever uses the non-blocking paths.
class MessageQueue {
public:
    explicit MessageQueue(std::size_t capacity = 10000,
                          DropPolicy policy = DropPolicy::BlockSender)
        : capacity_(capacity), policy_(policy) {}

    // Blocking under BlockSender when full; under DropNewest a full queue
    // drops the new envelope and returns false.
    bool push(Envelope env) {
        std::unique_lock lock(mu_);
        if (entries_.size() >= capacity_) {
            if (policy_ == DropPolicy::DropNewest) {
                ++dropped_;
                return false;
            }
            not_full_.wait(lock, [this] { return entries_.size() < capacity_ || closed_; });
            if (closed_) {
                ++dropped_;
                return false;
            }
        }
        entries_.push_back(std::move(env));
        not_empty_.notify_one();
        return true;
    }

    // Never blocks; returns false (and counts a drop) when full, regardless
    // of policy. The SIM runtime treats a false under BlockSender as a
    // scenario error since a single-threaded simulation cannot block.
    bool try_push(Envelope env) {
        std::lock_guard lock(mu_);
        if (entries_.size() >= capacity_) {
            ++dropped_;
            return false;
        }
        entries_.push_back(std::move(env));
        not_empty_.notify_one();
        return true;
    }

    std::optional<Envelope> pop() {
        std::lock_guard lock(mu_);
        if (entries_.empty()) {
            return std::nullopt;
        }
        Envelope env = std::move(entries_.front());
        entries_.pop_front();
        not_full_.notify_one();
        return env;
    }

    void close() {
        std::lock_guard lock(mu_);
        closed_ = true;
        not_full_.notify_all();
        not_empty_.notify_all();
    }

    std::size_t size() const {
        std::lock_guard lock(mu_);
        return entries_.size();
    }

    std::uint64_t dropped() const {
        std::lock_guard lock(mu_);
        return dropped_;
    }

    std::size_t capacity() const { return capacity_; }
    DropPolicy policy() const { return policy_; }

private:
    const std::size_t capacity_;
    const DropPolicy policy_;
    mutable std::mutex mu_;
    std::condition_variable not_full_;
    std::condition_variable not_empty_;
    std::deque<Envelope> entries_;
    std::uint64_t dropped_ = 0;
    bool closed_ = false;
};

} // namespace meshbed
