#ifndef CATAQ_RNG_HPP
#define CATAQ_RNG_HPP

#include <cstdint>
#include <limits>

// Splittable xoshiro256++ generator: one independent stream per replication,
// derived from (seed, stream id) through splitmix64. Sampling never touches
// the standard library distributions, so equal seeds give bit-identical
// output on every platform.

namespace cataq {

class Rng {
  public:
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        Rng r;
        std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
        for (auto& word : r.s_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
        return r;
    }

    std::uint64_t next() {
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

    // Uniform in [0, 1).
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    double exponential(double rate) {
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return -std::log(u) / rate;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4] = {};
};

}  // namespace cataq

#endif
