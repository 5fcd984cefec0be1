#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace grasp {

// Deterministic random primitives. std::mt19937_64 output is pinned by the
// standard, but the standard distributions are not, so bounded ints, uniform
// doubles and gaussians are generated explicitly to keep artifacts
// reproducible across toolchains.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        // rejection sampling keeps the draw unbiased
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = engine_();
            if (r >= threshold) return r % n;
        }
    }

    /// Standard normal via Box-Muller (deterministic, unlike std::normal_distribution).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 step; used to decorrelate derived seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives a per-stage seed from the pipeline seed and a stage name, so every
/// stage draws from an independent stream while the whole run stays a pure
/// function of one seed.
std::uint64_t stage_seed(std::uint64_t root_seed, std::string_view stage);

}  // namespace grasp
