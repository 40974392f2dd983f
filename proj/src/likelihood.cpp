#include "cmsn/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "cmsn/errors.hpp"
#include "cmsn/logspace.hpp"
#include "cmsn/quadrature.hpp"
#include "cmsn/rng.hpp"

namespace cmsn {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double log1p2exp(double u) {
    if (u > 0.0) return std::log(2.0) + u + std::log1p(0.5 * std::exp(-u));
    return std::log1p(2.0 * std::exp(u));
}

void check_rows(const CountRows& rows, std::uint64_t m, std::uint32_t width) {
    if (rows.empty()) throw std::invalid_argument("log_marginal_likelihood: no rows");
    for (const auto& row : rows) {
        if (row.size() != width)
            throw std::invalid_argument("log_marginal_likelihood: row width mismatch");
        std::uint64_t s = 0;
        for (std::uint64_t c : row) s += c;
        if (s != m) throw std::invalid_argument("log_marginal_likelihood: row sum != m");
    }
}

// grid + golden-section maximizer shared by both priors
template <typename LL>
AlphaEstimate maximize_alpha(LL&& loglik) {
    constexpr int kGridLo = -6, kGridHi = 24;
    int best_g = kGridLo;
    double best_v = kNegInf;
    std::vector<double> grid_vals;
    for (int g = kGridLo; g <= kGridHi; ++g) {
        double v = loglik(std::ldexp(1.0, g));
        grid_vals.push_back(v);
        if (v > best_v) {
            best_v = v;
            best_g = g;
        }
    }
    if (best_g == kGridLo || best_g == kGridHi) {
        std::ostringstream msg;
        msg << "estimate_alpha: grid maximizer at boundary 2^" << best_g
            << "; widen the search grid";
        throw NumericError(msg.str());
    }

    double a = std::ldexp(1.0, best_g - 1);
    double b = std::ldexp(1.0, best_g + 1);
    AlphaEstimate est;
    est.bracket = {a, b};

    const double gr = 0.6180339887498949;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = loglik(c), fd = loglik(d);
    int iters = 0;
    while (b - a > 1e-3 && iters < 200) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = loglik(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = loglik(d);
        }
        ++iters;
    }
    est.alpha_hat = 0.5 * (a + b);
    est.log_likelihood_at_hat = loglik(est.alpha_hat);
    est.iterations = iters;
    est.tolerance_met = (b - a) <= 1e-3;
    return est;
}

CountRows rows_of(const Sketch& sketch) {
    CountRows rows;
    rows.reserve(sketch.depth());
    for (std::uint32_t n = 0; n < sketch.depth(); ++n) rows.push_back(sketch.row(n));
    return rows;
}

}  // namespace

namespace detail {

double log_marginal_likelihood_row(const std::vector<std::uint64_t>& row, std::uint64_t m,
                                   double alpha, std::uint32_t width, LikelihoodCache& cache,
                                   bool dedup) {
    const double md = static_cast<double>(m);
    const double J = static_cast<double>(width);
    const double a = alpha / J;

    // ln V = ln m + (m + J/2) ln(a) + alpha - (J/2) ln(pi/2) - sum_j ln c_j!
    double lv = std::log(md) + (md + J / 2.0) * std::log(a) + alpha
                - (J / 2.0) * std::log(kPi / 2.0);
    for (std::uint64_t c : row) lv -= cache.log_factorials(c);

    // distinct counts with multiplicities; dependency on j is through c_j only
    std::map<std::uint64_t, std::uint64_t> uniq;
    if (dedup)
        for (std::uint64_t c : row) ++uniq[c];

    auto& lf = cache.log_factorials;
    auto phi = [&](double u) {
        double y = std::exp(u);
        if (!std::isfinite(y)) return kNegInf;
        double z = a * std::sqrt(1.0 + 2.0 * y);
        if (!std::isfinite(z)) return kNegInf;
        double acc = md * u + (J / 4.0 - md / 2.0) * log1p2exp(u);
        if (dedup) {
            for (const auto& [c, cnt] : uniq)
                acc += static_cast<double>(cnt) * log_bessel_k_half(c, z, lf);
        } else {
            for (std::uint64_t c : row) acc += log_bessel_k_half(c, z, lf);
        }
        return acc;
    };
    return lv + integrate_log_peaked(phi);
}

}  // namespace detail

double log_marginal_likelihood(const CountRows& rows, std::uint64_t m, double alpha,
                               std::uint32_t width, LikelihoodCache& cache) {
    if (!(alpha > 0.0)) throw std::invalid_argument("log_marginal_likelihood: alpha <= 0");
    check_rows(rows, m, width);
    double acc = 0.0;
    for (const auto& row : rows)
        acc += detail::log_marginal_likelihood_row(row, m, alpha, width, cache, true);
    return acc;
}

double log_marginal_likelihood(const CountRows& rows, std::uint64_t m, double alpha,
                               std::uint32_t width) {
    LikelihoodCache cache;
    return log_marginal_likelihood(rows, m, alpha, width, cache);
}

double dp_log_marginal_likelihood(const CountRows& rows, std::uint64_t m, double alpha,
                                  std::uint32_t width) {
    if (!(alpha > 0.0)) throw std::invalid_argument("dp_log_marginal_likelihood: alpha <= 0");
    check_rows(rows, m, width);
    const double md = static_cast<double>(m);
    const double beta = alpha / width;
    LogFactorialTable lf;
    double acc = 0.0;
    for (const auto& row : rows) {
        double v = lf(m) + log_gamma(alpha) - log_gamma(alpha + md);
        for (std::uint64_t c : row) {
            v -= lf(c);
            v += log_gamma(beta + static_cast<double>(c)) - log_gamma(beta);
        }
        acc += v;
    }
    return acc;
}

AlphaEstimate estimate_alpha(const CountRows& rows, std::uint64_t m, std::uint32_t width) {
    if (m == 0) throw std::invalid_argument("estimate_alpha: empty sketch");
    LikelihoodCache cache;
    return maximize_alpha(
        [&](double alpha) { return log_marginal_likelihood(rows, m, alpha, width, cache); });
}

AlphaEstimate estimate_alpha(const Sketch& sketch) {
    return estimate_alpha(rows_of(sketch), sketch.total(), sketch.width());
}

AlphaEstimate estimate_alpha_dp(const CountRows& rows, std::uint64_t m, std::uint32_t width) {
    if (m == 0) throw std::invalid_argument("estimate_alpha_dp: empty sketch");
    return maximize_alpha(
        [&](double alpha) { return dp_log_marginal_likelihood(rows, m, alpha, width); });
}

AlphaEstimate estimate_alpha_dp(const Sketch& sketch) {
    return estimate_alpha_dp(rows_of(sketch), sketch.total(), sketch.width());
}

CountRows sample_bucket_rows(double alpha, std::uint32_t width, std::uint32_t depth,
                             std::uint64_t m, std::uint64_t seed) {
    if (!(alpha > 0.0)) throw std::invalid_argument("sample_bucket_rows: alpha <= 0");
    if (width == 0 || depth == 0)
        throw std::invalid_argument("sample_bucket_rows: zero dimensions");
    Rng rng(seed);
    const double a = alpha / width;
    CountRows rows(depth, std::vector<std::uint64_t>(width, 0));
    std::vector<double> cum(width);
    for (std::uint32_t n = 0; n < depth; ++n) {
        double total = 0.0;
        for (std::uint32_t j = 0; j < width; ++j) {
            // (shape a, scale 1) parameterization = IG(mean a, shape a^2)
            total += rng.inverse_gaussian(a, a * a);
            cum[j] = total;
        }
        for (std::uint64_t i = 0; i < m; ++i) {
            double u = rng.uniform01() * total;
            auto it = std::lower_bound(cum.begin(), cum.end(), u);
            std::uint32_t j = static_cast<std::uint32_t>(it - cum.begin());
            if (j >= width) j = width - 1;
            ++rows[n][j];
        }
    }
    return rows;
}

}  // namespace cmsn
