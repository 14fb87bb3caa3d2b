#include "meshbed/dias/bloom.hpp"

#include <cmath>
#include <stdexcept>

namespace meshbed::dias {

namespace {

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = 14695981039346656037ULL ^ seed;
    for (const char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

BloomFilter::BloomFilter(std::size_t bits, std::size_t hashes)
    : bits_(bits), hashes_(hashes), words_((bits + 63) / 64, 0) {
    if (bits == 0 || hashes == 0) {
        throw std::invalid_argument("bloom filter needs bits > 0 and hashes > 0");
    }
}

void BloomFilter::insert(std::string_view item) {
    const std::uint64_t h1 = fnv1a(item, 0x9e3779b97f4a7c15ULL);
    const std::uint64_t h2 = fnv1a(item, 0xc2b2ae3d27d4eb4fULL) | 1;
    for (std::size_t i = 0; i < hashes_; ++i) {
        const std::uint64_t bit = (h1 + i * h2) % bits_;
        words_[bit / 64] |= (1ULL << (bit % 64));
    }
    ++inserted_;
}

bool BloomFilter::contains(std::string_view item) const {
    const std::uint64_t h1 = fnv1a(item, 0x9e3779b97f4a7c15ULL);
    const std::uint64_t h2 = fnv1a(item, 0xc2b2ae3d27d4eb4fULL) | 1;
    for (std::size_t i = 0; i < hashes_; ++i) {
        const std::uint64_t bit = (h1 + i * h2) % bits_;
        if ((words_[bit / 64] & (1ULL << (bit % 64))) == 0) {
            return false;
        }
    }
    return true;
}

void BloomFilter::insert_u64(std::uint64_t item) {
    char buf[8];
    for (int i = 0; i < 8; ++i) {
        buf[i] = static_cast<char>((item >> (8 * i)) & 0xff);
    }
    insert(std::string_view(buf, 8));
}

bool BloomFilter::contains_u64(std::uint64_t item) const {
    char buf[8];
    for (int i = 0; i < 8; ++i) {
        buf[i] = static_cast<char>((item >> (8 * i)) & 0xff);
    }
    return contains(std::string_view(buf, 8));
}

double BloomFilter::expected_fpr(std::size_t bits, std::size_t hashes, std::uint64_t n) {
    const double exponent = -static_cast<double>(hashes) * static_cast<double>(n) /
                            static_cast<double>(bits);
    return std::pow(1.0 - std::exp(exponent), static_cast<double>(hashes));
}

} // namespace meshbed::dias
