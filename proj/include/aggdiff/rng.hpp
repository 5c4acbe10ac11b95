// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace aggdiff {

/// Deterministic, seedable generator (xoshiro256++ seeded via splitmix64).
/// Self-contained so that streams are reproducible independently of the
/// standard library's distribution implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed)
    {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            // splitmix64
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
        have_spare_ = false;
    }

    std::uint64_t next_u64()
    {
        auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        std::uint64_t const result = rotl(state_[0] + state_[3], 23) + state_[0];
        std::uint64_t const t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in (0,1] using the top 53 bits.
    double uniform()
    {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; one spare value is cached.
    double normal()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double const u1 = uniform();
        double const u2 = uniform();
        double const radius = std::sqrt(-2.0 * std::log(u1));
        double const angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Uniform direction on the unit sphere in dimension d (d >= 1).
    void unit_vector(int d, double* out)
    {
        while (true) {
            double norm_sq = 0;
            for (int k = 0; k < d; ++k) {
                out[k] = normal();
                norm_sq += out[k] * out[k];
            }
            if (norm_sq > 1e-300) {
                double const inv = 1.0 / std::sqrt(norm_sq);
                for (int k = 0; k < d; ++k)
                    out[k] *= inv;
                return;
            }
        }
    }

  private:
    std::uint64_t state_[4] = {};
    double spare_ = 0;
    bool have_spare_ = false;
};

}  // namespace aggdiff
