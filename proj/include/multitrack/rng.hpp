#pragma once
#include <cstdint>
#include <random>
#include <string>

namespace multitrack {

// Stateless key derivation so that every (trace, link, sweep, packet) gets its
// own reproducible random stream regardless of evaluation order or thread count.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                std::uint64_t c = 0) {
    std::uint64_t k = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
    k = splitmix64(k ^ a);
    k = splitmix64(k ^ (b * 0x9e3779b97f4a7c15ULL));
    k = splitmix64(k ^ (c * 0xc2b2ae3d27d4eb4fULL));
    return k;
}

inline std::uint64_t hash_string(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// mt19937_64 keyed by a derived seed; normal draws go through a fresh
// distribution each time a Rng is constructed, so streams never alias.
class Rng {
  public:
    explicit Rng(std::uint64_t key) : engine_(key) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double gaussian(double mean = 0.0, double std = 1.0) {
        return std::normal_distribution<double>(mean, std)(engine_);
    }
    std::uint64_t next_u64() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

}  // namespace multitrack
