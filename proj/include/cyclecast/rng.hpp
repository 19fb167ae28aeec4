#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cyclecast {

/// Deterministic random stream used wherever the toolkit needs randomness.
///
/// The raw word stream is std::mt19937_64, whose output sequence is fully
/// specified by the C++ standard, so a given seed produces the same 64-bit
/// words on every platform. The floating-point mappings are written out
/// explicitly because the <random> distribution classes are not portable
/// across standard-library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal draw. Box-Muller on two uniforms; the pair's second
    /// value is cached, so two consecutive calls consume two uniforms.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * kPi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    static constexpr double kPi = 3.14159265358979323846;

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cyclecast
