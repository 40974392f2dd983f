#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace cmsn {

// Seeded random variate generator with fully specified transforms, so that
// identical seeds reproduce identical streams across platforms (mt19937_64 is
// pinned by the standard; the std::*_distribution adaptors are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t bits() { return gen_(); }

    // uniform on [0, 1) with 53-bit resolution
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1]
    double uniform01_pos() { return 1.0 - uniform01(); }

    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("uniform_below: zero bound");
        const std::uint64_t limit = ~0ULL - (~0ULL % bound + 1) % bound;
        for (;;) {
            std::uint64_t r = gen_();
            if (r <= limit) return r % bound;
        }
    }

    double exponential() { return -std::log(uniform01_pos()); }

    // Marsaglia polar method
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Marsaglia-Tsang for shape >= 1, boosted by u^(1/a) below 1; unit scale
    double gamma(double shape) {
        if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be positive");
        if (shape < 1.0) {
            double g = gamma(shape + 1.0);
            return g * std::pow(uniform01_pos(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = uniform01_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        double x = gamma(a);
        double y = gamma(b);
        return x / (x + y);
    }

    // Michael-Schucany-Haas; parameters are the mean mu and shape lambda
    double inverse_gaussian(double mu, double lambda) {
        if (!(mu > 0.0 && lambda > 0.0))
            throw std::invalid_argument("inverse_gaussian: bad parameters");
        double n = normal();
        double y = n * n;
        double x = mu + mu * mu * y / (2.0 * lambda)
                   - (mu / (2.0 * lambda)) * std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
        if (x <= 0.0) x = std::numeric_limits<double>::min();
        if (uniform01() <= mu / (mu + x)) return x;
        return mu * mu / x;
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cmsn
