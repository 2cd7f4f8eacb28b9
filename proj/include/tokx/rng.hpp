#pragma once

#include <cstdint>
#include <string_view>

namespace tokx {

// Deterministic, platform-independent PRNG. std::mt19937 itself is
// portable but the standard distributions are not, so all bounded draws
// are derived here from raw splitmix64 output. Every consumer derives a
// named substream from the single run seed, which keeps whole-pipeline
// outputs byte-identical across --jobs settings and platforms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound). Lemire multiply-shift; the ~2^-64 bias is
    // irrelevant at benchmark scale and the result is platform-stable.
    std::uint64_t below(std::uint64_t bound) {
        using u128 = unsigned __int128;
        return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) * bound) >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Derives an independent substream named by (label, index).
    Rng derive(std::string_view label, std::uint64_t index = 0) const {
        std::uint64_t h = 0xCBF29CE484222325ull; // FNV-1a
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ull;
        }
        Rng sub(state_ ^ h);
        std::uint64_t mixed = sub.next_u64() ^ (index * 0x9E3779B97F4A7C15ull);
        return Rng(mixed);
    }

  private:
    std::uint64_t state_;
};

} // namespace tokx
