#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace conjlab {

// Counter-based deterministic generator.  A draw is a pure function of
// (seed, stream name, counter); there is no hidden state, so diagnostics that
// sample can be replayed bit-for-bit from the seed recorded in a report and
// are insensitive to evaluation order.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::string_view stream)
        : key_(mix(seed ^ fnv1a(stream))) {}

    // Uniform in [0, 1).
    double uniform(std::uint64_t counter) const {
        std::uint64_t z = mix(key_ ^ mix(counter + 0x9e3779b97f4a7c15ull));
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }

    double uniform(std::uint64_t counter, double a, double b) const {
        return a + (b - a) * uniform(counter);
    }

    std::uint64_t bits(std::uint64_t counter) const {
        return mix(key_ ^ mix(counter + 0x9e3779b97f4a7c15ull));
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        return h;
    }

  private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
};

} // namespace conjlab
