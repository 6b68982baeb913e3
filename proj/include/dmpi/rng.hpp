#ifndef DMPI_RNG_HPP
#define DMPI_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "dmpi/error.hpp"

namespace dmpi {

// splitmix64 finalizer, used to derive independent stream seeds from a
// master seed plus a path of integer labels (replication, module, chain).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(master ^ 0x5bf0364c369a7c81ull);
    for (std::uint64_t p : path) s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ull));
    return s;
}

// Seeded generator with hand-rolled variate transforms.  The engine is
// mt19937_64 (bit-exact by standard); the transforms avoid
// std::*_distribution, whose draw sequences differ across standard
// libraries, so a given seed reproduces the same stream everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }

    // uniform on [0,1), 53 random bits
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // standard normal via Box-Muller; one variate per call, two uniforms consumed
    double normal() {
        const double u1 = 1.0 - uniform01(); // (0,1], keeps log finite
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi() * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // gamma(shape, scale) by Marsaglia-Tsang squeeze; shape < 1 boosted
    double gamma(double shape, double scale) {
        if (!(shape > 0.0) || !(scale > 0.0))
            throw Error("InvalidArgument", "gamma requires positive shape and scale");
        if (shape < 1.0) {
            const double u = 1.0 - uniform01();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = 1.0 - uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a, 1.0);
        const double y = gamma(b, 1.0);
        return x / (x + y);
    }

    double chi_squared(double dof) { return gamma(0.5 * dof, 2.0); }

    // normal(mean, sd) conditioned on [lo, hi] by rejection
    double truncated_normal(double mean, double sd, double lo, double hi,
                            long max_tries = 1000000L) {
        for (long i = 0; i < max_tries; ++i) {
            const double x = normal(mean, sd);
            if (x >= lo && x <= hi) return x;
        }
        throw Error("TruncationTooTight", "truncated normal rejection stalled");
    }

private:
    static constexpr double two_pi() { return 6.283185307179586476925286766559; }

    std::mt19937_64 eng_;
};

} // namespace dmpi

#endif
