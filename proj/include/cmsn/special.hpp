#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace cmsn {

// ln Gamma(x) for x > 0, Lanczos approximation (g=7, 9 terms).
double log_gamma(double x);

// ln (a)_(n) = ln Gamma(a+n) - ln Gamma(a), ascending factorial; a > 0, n >= 0.
double log_rising_factorial(double a, std::uint64_t n);

// Growable table of ln k!; lookups beyond the current size extend it.
class LogFactorialTable {
public:
    LogFactorialTable() { values_.push_back(0.0); }
    double operator()(std::uint64_t n) {
        while (values_.size() <= n)
            values_.push_back(values_.back() + std::log(static_cast<double>(values_.size())));
        return values_[n];
    }

private:
    std::vector<double> values_;
};

// ln K_{c-1/2}(z) for integer c >= 0, z > 0, via the half-integer finite sum
// (c = 0 uses the order symmetry K_{-1/2} = K_{1/2}).  The sum is unimodal in
// its index; only terms within ~46 nats of the largest are accumulated, so the
// cost is bounded even for very large c.
double log_bessel_k_half(std::uint64_t c, double z);
double log_bessel_k_half(std::uint64_t c, double z, LogFactorialTable& lf);

// ln K_{|nu|}(z) for integer nu, z > 0.  Orders 0 and 1 come from the power
// series (z <= 2) or a continued fraction (z > 2); higher orders use the
// upward recurrence in log space.  Stable down to the deep exponential tail.
double log_bessel_k_int(int nu, double z);

}  // namespace cmsn
