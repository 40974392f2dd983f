#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>

namespace cmsn {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ln(e^a + e^b), safe for -inf operands
inline double log_add(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b == kNegInf) return a;
    return a + std::log1p(std::exp(b - a));
}

// ln sum_i e^{v_i}, computed as v* + ln sum e^{v_i - v*}
inline double log_sum_exp(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("log_sum_exp: empty input");
    double mx = kNegInf;
    for (double v : values) mx = std::max(mx, v);
    if (mx == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - mx);
    return mx + std::log(acc);
}

inline double log_sum_exp(const Eigen::ArrayXd& values) {
    if (values.size() == 0) throw std::invalid_argument("log_sum_exp: empty input");
    double mx = values.maxCoeff();
    if (mx == kNegInf) return kNegInf;
    return mx + std::log((values - mx).exp().sum());
}

}  // namespace cmsn
