#pragma once

#include <cstdint>

namespace enkg {

// splitmix64 step: advances the state by the golden-gamma increment and
// returns the finalized output word.
inline uint64_t splitmix64_next(uint64_t & state) {
    state += 0x9E3779B97F4A7C15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// xoshiro256** (Blackman/Vigna), seeded through splitmix64 so that any
// 64-bit seed yields a well-mixed 256-bit state. Identical seeds produce
// identical streams on every platform.
class Xoshiro256StarStar {
public:
    explicit Xoshiro256StarStar(uint64_t seed) {
        uint64_t sm = seed;
        for (auto & word : s_) {
            word = splitmix64_next(sm);
        }
    }

    uint64_t next() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform draw in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    static uint64_t rotl(uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    uint64_t s_[4];
};

// Deterministic substream seed for token site (frame, site) under a run
// seed. Frames are numbered from 1 for generated frames; frame 0 is
// reserved for scene initialization. Chaining splitmix64 steps keeps the
// substreams decorrelated while staying order-independent, so sites may
// be evaluated concurrently with serial-identical results.
inline uint64_t substream_seed(uint64_t seed, uint64_t frame, uint64_t site) {
    uint64_t s = seed;
    uint64_t a = splitmix64_next(s);
    s = a ^ frame;
    a = splitmix64_next(s);
    s = a ^ site;
    return splitmix64_next(s);
}

} // namespace enkg
