#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "cmsn/gen_factorial.hpp"
#include "cmsn/logspace.hpp"
#include "cmsn/quadrature.hpp"
#include "cmsn/special.hpp"

using namespace cmsn;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("boundary inputs yield -inf or errors, never NaN") {
    CHECK(log_add(kNegInf, kNegInf) == kNegInf);
    CHECK(log_add(-3.0, kNegInf) == -3.0);
    double dead = integrate_log([](double) { return kNegInf; },
                                tanh_sinh_rule(Domain::Unit01, 5));
    CHECK(dead == kNegInf);
    CHECK(integrate_log_peaked([](double) { return kNegInf; }) == kNegInf);
    CHECK_FALSE(std::isnan(integrate_log_peaked([](double u) {
        return std::abs(u) > 500.0 ? std::numeric_limits<double>::quiet_NaN() : -u * u;
    })));
}

TEST_CASE("log_sum_exp basics") {
    std::vector<double> two_zeros{0.0, 0.0};
    CHECK(log_sum_exp(std::span<const double>(two_zeros)) == doctest::Approx(std::log(2.0)));

    std::vector<double> deep{-1000.0, -1000.0};
    CHECK(log_sum_exp(std::span<const double>(deep))
          == doctest::Approx(-1000.0 + std::log(2.0)));

    std::vector<double> none{kNegInf, kNegInf};
    CHECK(log_sum_exp(std::span<const double>(none)) == kNegInf);

    std::vector<double> empty;
    CHECK_THROWS_AS(log_sum_exp(std::span<const double>(empty)), std::invalid_argument);
}

TEST_CASE("log_gamma reference points") {
    CHECK(std::abs(log_gamma(1.0)) < 1e-14);
    CHECK(log_gamma(0.5) == doctest::Approx(0.5 * std::log(kPi)).epsilon(1e-14));

    // exact integer-factorial sum
    double sum = 0.0;
    for (int k = 1; k <= 99; ++k) sum += std::log(static_cast<double>(k));
    CHECK(std::abs(log_gamma(100.0) - sum) < 1e-13 * std::abs(sum));
}

TEST_CASE("log_rising_factorial") {
    CHECK(log_rising_factorial(2.7, 0) == 0.0);
    CHECK(log_rising_factorial(0.5, 2) == doctest::Approx(std::log(0.75)).epsilon(1e-14));

    // loop-product oracle
    double prod = 0.0;
    for (int i = 0; i < 50; ++i) prod += std::log(0.5 + i);
    CHECK(log_rising_factorial(0.5, 50) == doctest::Approx(prod).epsilon(1e-12));

    CHECK_THROWS_AS(log_rising_factorial(-1.0, 3), std::invalid_argument);
}

TEST_CASE("half-integer Bessel closed forms") {
    // order 1/2 has the closed form sqrt(pi/(2z)) e^-z
    double expected = 0.5 * std::log(kPi / 4.0) - 2.0;
    CHECK(log_bessel_k_half(1, 2.0) == doctest::Approx(expected).epsilon(1e-14));

    // order symmetry maps c = 0 onto c = 1
    for (double z : {0.3, 1.0, 7.5})
        CHECK(log_bessel_k_half(0, z) == doctest::Approx(log_bessel_k_half(1, z)));

    // K_{5/2}(1), high-precision oracle value
    CHECK(log_bessel_k_half(3, 1.0) == doctest::Approx(1.1717015017000407).epsilon(1e-12));

    CHECK_THROWS_AS(log_bessel_k_half(2, 0.0), std::invalid_argument);
}

TEST_CASE("half-integer Bessel windowed sum at large order") {
    // oracle values from an arbitrary-precision evaluation of the same identity
    LogFactorialTable lf;
    CHECK(log_bessel_k_half(1000, 5.0, lf)
          == doctest::Approx(4985.234927636514).epsilon(1e-12));
    CHECK(log_bessel_k_half(300000, 50.0, lf)
          == doctest::Approx(2517787.8002407365).epsilon(1e-12));
}

TEST_CASE("integer-order Bessel reference points") {
    // high-precision oracle values computed ahead of the build
    CHECK(log_bessel_k_int(1, 1.0) == doctest::Approx(std::log(0.6019072301972346)).epsilon(1e-9));
    CHECK(log_bessel_k_int(0, 0.1) == doctest::Approx(0.8866843666787421).epsilon(1e-12));
    CHECK(log_bessel_k_int(0, 3.0) == doctest::Approx(-3.3598777846417196).epsilon(1e-12));
    CHECK(log_bessel_k_int(4, 2.5) == doctest::Approx(-0.2676110398424819).epsilon(1e-11));
    CHECK(log_bessel_k_int(10, 0.3) == doctest::Approx(31.077380538819467).epsilon(1e-12));
    CHECK(log_bessel_k_int(3, 80.0) == doctest::Approx(-81.91087806982053).epsilon(1e-12));

    // deep tail without underflow
    CHECK(log_bessel_k_int(1, 700.0) == doctest::Approx(-703.0492134827669).epsilon(1e-12));
    CHECK(log_bessel_k_int(1, 1e4) == doctest::Approx(-10004.379341335218).epsilon(1e-12));
    CHECK(log_bessel_k_int(1, 1e-6) == doctest::Approx(13.815510557957058).epsilon(1e-12));

    // symmetry in the order
    for (double z : {0.5, 3.0, 40.0})
        CHECK(log_bessel_k_int(-1, z) == doctest::Approx(log_bessel_k_int(1, z)));

    // large-z agreement with the leading asymptotic form
    double lead = -700.0 + 0.5 * std::log(kPi / 1400.0);
    CHECK(std::abs(log_bessel_k_int(1, 700.0) - lead) < 1e-3);

    CHECK_THROWS_AS(log_bessel_k_int(1, -1.0), std::invalid_argument);
}

TEST_CASE("both Bessel families satisfy the order recurrence") {
    // K_{v+1}(z) = K_{v-1}(z) + (2v/z) K_v(z)
    for (double z : {0.5, 2.5, 10.0}) {
        for (int nu = 1; nu <= 8; ++nu) {
            double lhs = log_bessel_k_int(nu + 1, z);
            double rhs = log_add(log_bessel_k_int(nu - 1, z),
                                 std::log(2.0 * nu / z) + log_bessel_k_int(nu, z));
            CHECK(std::abs(lhs - rhs) < 1e-9 * std::max(1.0, std::abs(lhs)));
        }
        for (std::uint64_t c = 1; c <= 8; ++c) {
            // half-integer order v = c - 1/2
            double v = static_cast<double>(c) - 0.5;
            double lhs = log_bessel_k_half(c + 1, z);
            double rhs = log_add(log_bessel_k_half(c - 1 == 0 ? 1 : c - 1, z),
                                 std::log(2.0 * v / z) + log_bessel_k_half(c, z));
            if (c == 1) continue;  // c-1 = 0 aliases order +1/2, not -3/2
            CHECK(std::abs(lhs - rhs) < 1e-9 * std::max(1.0, std::abs(lhs)));
        }
    }
}

TEST_CASE("tanh-sinh rules and integrate_log") {
    // int_0^1 x dx = 1/2
    double est = integrate_log_adaptive([](double x) { return std::log(x); }, Domain::Unit01);
    CHECK(std::abs(std::exp(est) - 0.5) < 1e-12);

    // int_0^inf e^-x dx = 1
    est = integrate_log_adaptive([](double x) { return -x; }, Domain::HalfLine);
    CHECK(std::abs(std::exp(est) - 1.0) < 1e-10);

    // ln int_0^inf x^99 e^-x dx = ln Gamma(100)
    est = integrate_log_adaptive([](double x) { return 99.0 * std::log(x) - x; },
                                 Domain::HalfLine);
    CHECK(std::abs(est - log_gamma(100.0)) < 1e-8);

    // rule invariants: interior nodes
    for (int level : {4, 8}) {
        auto rule = tanh_sinh_rule(Domain::Unit01, level);
        CHECK(rule.nodes.minCoeff() > 0.0);
        CHECK(rule.nodes.maxCoeff() < 1.0);
        auto half = tanh_sinh_rule(Domain::HalfLine, level);
        CHECK(half.nodes.minCoeff() > 0.0);
    }

    // monotonicity in the integrand
    auto rule = tanh_sinh_rule(Domain::Unit01, 8);
    double f = integrate_log([](double x) { return std::log(x); }, rule);
    double g = integrate_log([](double x) { return std::log(x) + 0.1; }, rule);
    CHECK(f <= g);
}

TEST_CASE("peaked log-integrator matches log-gamma at any scale") {
    for (double m : {3.0, 99.0, 500000.0}) {
        double est = integrate_log_peaked([m](double u) {
            double x = std::exp(u);
            return std::isfinite(x) ? (m + 1.0) * u - x : kNegInf;
        });
        double ref = log_gamma(m + 1.0);
        CHECK(std::abs(est - ref) < 1e-8 + 1e-11 * std::abs(ref));
    }

    // logistic-transformed Beta mass with an endpoint singularity
    double p = 300000.0, q = -0.5;
    double est = integrate_log_peaked([p, q](double u) {
        double ls = (u > 0.0) ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u));
        double l1s = (u > 0.0) ? -u - std::log1p(std::exp(-u)) : -std::log1p(std::exp(u));
        return (p + 1.0) * ls + (q + 1.0) * l1s;
    });
    double ref = log_gamma(p + 1.0) + log_gamma(q + 1.0) - log_gamma(p + q + 2.0);
    CHECK(std::abs(est - ref) < 1e-8);
}

TEST_CASE("generalized factorial coefficients") {
    GenFactorialTable table(0.5, 12);
    CHECK(table.log_c(1, 1) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
    for (std::size_t m = 1; m <= 12; ++m)
        CHECK(table.log_c(m, m) == doctest::Approx(m * std::log(0.5)).epsilon(1e-13));
    CHECK(table.log_c(3, 0) == kNegInf);
    CHECK(table.log_c(0, 0) == 0.0);

    // sigma -> 0 limit reaches the signless Stirling number |s(3,2)| = 3
    GenFactorialTable tiny(1e-6, 5);
    double scaled = std::exp(tiny.log_c(3, 2) - 2.0 * std::log(1e-6));
    CHECK(scaled == doctest::Approx(3.0).epsilon(1e-4));

    CHECK_THROWS_AS(GenFactorialTable(1.5, 4), std::invalid_argument);
    CHECK_THROWS_AS(GenFactorialTable(0.5, 0), std::invalid_argument);
}
