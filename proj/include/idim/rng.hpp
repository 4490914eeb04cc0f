#pragma once

#include <cstdint>
#include <cmath>

namespace idim {

// splitmix64: tiny, seed-stable across platforms.  Used everywhere a seeded
// stream is required so that identical seeds give identical artifacts.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) with 53 random bits.
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Marsaglia polar method; avoids trig for portability of rounding.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, q;
        do {
            u = 2.0 * next_uniform() - 1.0;
            v = 2.0 * next_uniform() - 1.0;
            q = u * u + v * v;
        } while (q >= 1.0 || q == 0.0);
        const double f = std::sqrt(-2.0 * std::log(q) / q);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace idim
