#pragma once

#include <cstdint>
#include <vector>

namespace implink {

// All randomized machinery in the library draws from this generator instead of
// <random> distributions, whose output is implementation-defined. Every draw
// sequence is a pure function of the 64-bit seed it was constructed with, so
// results reproduce bit-exactly across platforms and worker counts.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Folds stream identifiers (cascade index, replicate, repost index, ...) into
// a base seed. Order-sensitive.
template <class... Parts>
std::uint64_t derive_seed(std::uint64_t seed, Parts... parts) {
    std::uint64_t state = seed ^ 0xa0761d6478bd642fULL;
    std::uint64_t out = splitmix64_next(state);
    ((state ^= static_cast<std::uint64_t>(parts) + 0x9e3779b97f4a7c15ULL,
      out ^= splitmix64_next(state)),
     ...);
    return out;
}

class Xoshiro256ss {
public:
    explicit Xoshiro256ss(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    using result_type = std::uint64_t;
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~0ULL; }

    std::uint64_t operator()() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Unbiased uniform draw from [0, n). n must be > 0.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = (*this)();
            if (r >= threshold) return r % n;
        }
    }

    // Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    template <class T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[bounded(i)]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

}  // namespace implink
