#include "cmsn/special.hpp"

#include <cmath>
#include <stdexcept>

#include "cmsn/logspace.hpp"

namespace cmsn {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kEulerGamma = 0.577215664901532860606512090082402431;

const double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

double log_gamma_lanczos(double x) {
    // valid for x >= 0.5
    double acc = kLanczos[0];
    for (int k = 1; k < 9; ++k) acc += kLanczos[k] / (x - 1.0 + k);
    double t = x + 6.5;
    return 0.5 * std::log(2.0 * kPi) + (x - 0.5) * std::log(t) - t + std::log(acc);
}

// K_0 and K_1 on z <= 2 by the ascending series.
void log_k01_series(double z, double& lnk0, double& lnk1) {
    const double q = 0.25 * z * z;
    const double lz2 = std::log(0.5 * z);
    double i0 = 1.0, i1 = 1.0;          // I_1 carries the z/2 factor separately
    double s0 = 0.0, s1 = -2.0 * kEulerGamma + 1.0;  // k=0 term of the K_1 sum
    double term0 = 1.0, term1 = 1.0, hk = 0.0;
    for (int k = 1; k < 40; ++k) {
        term0 *= q / (static_cast<double>(k) * k);
        term1 *= q / (static_cast<double>(k) * (k + 1.0));
        hk += 1.0 / k;
        i0 += term0;
        i1 += term1;
        s0 += term0 * hk;
        s1 += term1 * (-2.0 * kEulerGamma + 2.0 * hk + 1.0 / (k + 1.0));
        if (term0 < 1e-19 * i0) break;
    }
    double k0 = -(lz2 + kEulerGamma) * i0 + s0;
    double k1 = 1.0 / z + 0.5 * z * (lz2 * i1 - 0.5 * s1);
    lnk0 = std::log(k0);
    lnk1 = std::log(k1);
}

// K_0 and K_1 on z > 2 by the Temme/Thompson-Barnett continued fraction,
// with the e^{-z} factor kept symbolic so nothing underflows.
void log_k01_cf2(double z, double& lnk0, double& lnk1) {
    const double eps = 1e-16;
    double b = 2.0 * (1.0 + z);
    double d = 1.0 / b;
    double h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25;
    double q = a1, c = a1, a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 2; i <= 40000; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < eps) break;
    }
    h = a1 * h;
    lnk0 = 0.5 * std::log(kPi / (2.0 * z)) - z - std::log(s);
    lnk1 = lnk0 + std::log((0.5 + z - h) / z);
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("log_gamma: requires x > 0");
    if (x < 0.5) {
        // reflection through Gamma(x)Gamma(1-x) = pi/sin(pi x)
        return std::log(kPi / std::sin(kPi * x)) - log_gamma_lanczos(1.0 - x);
    }
    return log_gamma_lanczos(x);
}

double log_rising_factorial(double a, std::uint64_t n) {
    if (!(a > 0.0)) throw std::invalid_argument("log_rising_factorial: requires a > 0");
    if (n == 0) return 0.0;
    return log_gamma(a + static_cast<double>(n)) - log_gamma(a);
}

namespace {

template <typename LGamma>
double log_bessel_k_half_impl(std::uint64_t c, double z, LGamma&& lg) {
    if (!(z > 0.0)) throw std::invalid_argument("log_bessel_k_half: requires z > 0");
    const std::uint64_t n = (c == 0) ? 0 : c - 1;
    const double base = 0.5 * std::log(kPi / (2.0 * z)) - z;
    if (n == 0) return base;

    const double l2z = std::log(2.0 * z);
    auto lterm = [&](std::uint64_t j) {
        return lg(n + j) - lg(j) - lg(n - j) - static_cast<double>(j) * l2z;
    };
    // term ratio (n+j)(n-j+1)/(2zj) is strictly decreasing in j: bisect for the mode
    const double nd = static_cast<double>(n);
    auto ratio_ge_one = [&](std::uint64_t j) {
        double jd = static_cast<double>(j);
        return (nd + jd) * (nd - jd + 1.0) >= 2.0 * z * jd;
    };
    std::uint64_t jstar;
    if (!ratio_ge_one(1))
        jstar = 0;
    else if (ratio_ge_one(n))
        jstar = n;
    else {
        std::uint64_t lo = 1, hi = n;
        while (hi - lo > 1) {
            std::uint64_t mid = lo + (hi - lo) / 2;
            if (ratio_ge_one(mid))
                lo = mid;
            else
                hi = mid;
        }
        jstar = lo;
    }
    const double best = lterm(jstar);
    double acc = 1.0;
    for (std::uint64_t j = jstar + 1; j <= n; ++j) {
        double v = lterm(j) - best;
        acc += std::exp(v);
        if (v < -46.0) break;
    }
    for (std::uint64_t j = jstar; j-- > 0;) {
        double v = lterm(j) - best;
        acc += std::exp(v);
        if (v < -46.0) break;
    }
    return base + best + std::log(acc);
}

}  // namespace

double log_bessel_k_half(std::uint64_t c, double z) {
    return log_bessel_k_half_impl(c, z, [](std::uint64_t k) {
        return log_gamma(static_cast<double>(k) + 1.0);
    });
}

double log_bessel_k_half(std::uint64_t c, double z, LogFactorialTable& lf) {
    return log_bessel_k_half_impl(c, z, [&lf](std::uint64_t k) { return lf(k); });
}

double log_bessel_k_int(int nu, double z) {
    if (!(z > 0.0)) throw std::invalid_argument("log_bessel_k_int: requires z > 0");
    const int n = std::abs(nu);
    double lnk0, lnk1;
    if (z <= 2.0)
        log_k01_series(z, lnk0, lnk1);
    else
        log_k01_cf2(z, lnk0, lnk1);
    if (n == 0) return lnk0;
    if (n == 1) return lnk1;
    // upward recurrence K_{k+1} = K_{k-1} + (2k/z) K_k; all terms positive
    double prev = lnk0, cur = lnk1;
    for (int k = 1; k < n; ++k) {
        double next = log_add(prev, std::log(2.0 * k / z) + cur);
        prev = cur;
        cur = next;
    }
    return cur;
}

}  // namespace cmsn
