#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace meshbed {

// SplitMix64 stream. Deterministic across platforms, unlike the std::
// distributions, which is what keeps SIM traces byte-identical.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, n). n must be > 0.
    std::uint64_t uniform_u64(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x = next_u64();
        while (x >= limit) {
            x = next_u64();
        }
        return x % n;
    }

    // Uniform double in [0, 1) with 53 bits of precision.
    double uniform_real() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform_real(double lo, double hi) {
        return lo + (hi - lo) * uniform_real();
    }

    bool bernoulli(double p) { return uniform_real() < p; }

    // Standard normal via Box-Muller (one value per call, no caching so the
    // stream position stays a pure function of call count).
    double gaussian() {
        double u1 = uniform_real();
        while (u1 <= 0.0) {
            u1 = uniform_real();
        }
        const double u2 = uniform_real();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double lognormal(double mu, double sigma) {
        return std::exp(mu + sigma * gaussian());
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_u64(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // Derives an independent stream, e.g. one per peer from a scenario seed.
    Rng fork(std::uint64_t salt) {
        Rng mixer(state_ ^ (salt * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL));
        return Rng(mixer.next_u64());
    }

private:
    std::uint64_t state_;
};

} // namespace meshbed
