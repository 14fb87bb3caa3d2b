#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace meshbed::dias {

// Plain m-bit, h-hash Bloom filter with double hashing over FNV-1a seeds.
// Deterministic across platforms. No false negatives by construction;
// expected false-positive rate (1 - e^(-h*n/m))^h.
class BloomFilter {
public:
    BloomFilter(std::size_t bits, std::size_t hashes);

    void insert(std::string_view item);
    bool contains(std::string_view item) const;

    void insert_u64(std::uint64_t item);
    bool contains_u64(std::uint64_t item) const;

    std::size_t bit_count() const { return bits_; }
    std::size_t hash_count() const { return hashes_; }
    std::uint64_t inserted() const { return inserted_; }

    // Expected false-positive rate after n insertions.
    static double expected_fpr(std::size_t bits, std::size_t hashes, std::uint64_t n);

private:
    std::size_t bits_;
    std::size_t hashes_;
    std::vector<std::uint64_t> words_;
    std::uint64_t inserted_ = 0;
};

} // namespace meshbed::dias
