#pragma once

#include <cstdint>

namespace rough {

// SplitMix64 step; used only to whiten seeds into generator state.
inline std::uint64_t splitmix64_next(std::uint64_t& s) {
    s += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// xoshiro256++ (Blackman/Vigna). Chosen for speed and a 64-bit-seedable
// state; its statistical adequacy for this project is not assumed but
// checked, by the per-bin histogram tests against the analytic channel laws.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        for (auto& word : s_) word = splitmix64_next(seed);
    }

    std::uint64_t operator()() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on (0, 1]: 53-bit mantissa, never zero, so log(u) stays finite.
    double uniform_pos() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

// Stream for repetition `rep` of a run seeded with `seed`. Streams are
// decorrelated by hashing (seed, rep) through SplitMix64 before state
// expansion; the repetition index never enters the raw state directly.
inline Xoshiro256pp repetition_stream(std::uint64_t seed, std::uint64_t rep) {
    std::uint64_t h = seed;
    const std::uint64_t a = splitmix64_next(h);
    return Xoshiro256pp(a ^ (0xD1B54A32D192ED03ull * (rep + 1)));
}

} // namespace rough
