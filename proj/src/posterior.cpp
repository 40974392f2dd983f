#include "cmsn/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "cmsn/errors.hpp"
#include "cmsn/logspace.hpp"
#include "cmsn/quadrature.hpp"
#include "cmsn/rng.hpp"
#include "cmsn/special.hpp"

namespace cmsn {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// ln(1 + e^t)
double softplus(double t) {
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

// ln(1 + 2 e^u)
double log1p2exp(double u) {
    if (u > 0.0) return std::log(2.0) + u + std::log1p(0.5 * std::exp(-u));
    return std::log1p(2.0 * std::exp(u));
}

// sqrt(1 + y) - 1 without cancellation
double sqrt1pm1(double y) { return y / (std::sqrt(1.0 + y) + 1.0); }

double log_binomial(std::uint64_t m, std::uint64_t k) {
    return log_gamma(static_cast<double>(m) + 1.0) - log_gamma(static_cast<double>(k) + 1.0)
           - log_gamma(static_cast<double>(m - k) + 1.0);
}

// ln of the ell = m branch integral plus prefactor
double nigp_log_pmf_diag(std::uint64_t m, double alpha) {
    if (m == 0) return 0.0;
    const double md = static_cast<double>(m);
    const double lpref = md * std::log(2.0) + std::log(alpha) + log_rising_factorial(0.5, m)
                         - log_gamma(md + 1.0);
    auto phi = [md, alpha](double u) {
        double y = std::exp(u);
        if (!std::isfinite(y)) return kNegInf;
        return (md + 1.0) * u - (md + 0.5) * log1p2exp(u) - alpha * sqrt1pm1(2.0 * y);
    };
    return lpref + integrate_log_peaked(phi);
}

// ln of the ell < m branch: binom(m,l) e^a a / pi * int_0^1 K_1(a/sqrt(x)) x^(m-l-1) (1-x)^(l-1/2) dx
double nigp_log_pmf_offdiag(std::uint64_t ell, std::uint64_t m, double alpha) {
    const double lpref = log_binomial(m, ell) + alpha + std::log(alpha) - std::log(kPi);
    const double p = static_cast<double>(m - ell);      // power of x, plus logistic Jacobian
    const double q = static_cast<double>(ell) + 0.5;    // power of (1-x), plus Jacobian
    auto phi = [p, q, alpha](double u) {
        double ls = -softplus(-u);
        double l1s = -softplus(u);
        double z = alpha * std::exp(-0.5 * ls);
        if (!std::isfinite(z)) return kNegInf;
        return log_bessel_k_int(1, z) + p * ls + q * l1s;
    };
    return lpref + integrate_log_peaked(phi);
}

void renormalize(Eigen::ArrayXd& log_probs) {
    log_probs -= log_sum_exp(log_probs);
}

// Normalized log pmf over 0..c for one bucket with mass beta.  All ell < c
// integrals share one uniform grid in logistic coordinates, with the Bessel
// factor evaluated lazily per node; each ell reads only the nodes within 46
// nats of its own peak.
Eigen::ArrayXd build_nigp_row_table(std::uint64_t c, double beta, LogFactorialTable& lf) {
    Eigen::ArrayXd out(c + 1);
    out[c] = nigp_log_pmf_diag(c, beta);
    if (c == 0) {
        out[0] = 0.0;
        return out;
    }
    const double cd = static_cast<double>(c);
    const double delta = std::min(0.35, 1.0 / std::sqrt(cd + 1.0));
    const double span = std::log(2.0 * cd + 4.0) + 198.0;
    const double ulo = -span;
    const long n = static_cast<long>(2.0 * span / delta) + 2;

    std::vector<double> ls(n), l1s(n), lnk(n, std::numeric_limits<double>::quiet_NaN());
    for (long i = 0; i < n; ++i) {
        double u = ulo + delta * i;
        ls[i] = -softplus(-u);
        l1s[i] = -softplus(u);
    }
    auto bessel_at = [&](long i) {
        if (std::isnan(lnk[i])) {
            double z = beta * std::exp(-0.5 * ls[i]);
            lnk[i] = std::isfinite(z) ? log_bessel_k_int(1, z) : kNegInf;
        }
        return lnk[i];
    };

    const double lconst = std::log(beta) + beta - std::log(kPi) + std::log(delta);
    std::vector<double> terms;
    terms.reserve(4096);
    for (std::uint64_t ell = 0; ell < c; ++ell) {
        const double p = cd - static_cast<double>(ell);
        const double q = static_cast<double>(ell) + 0.5;
        const double ustar = std::log(p / q);
        long i0 = std::clamp(static_cast<long>((ustar - ulo) / delta), 0L, n - 1);
        terms.clear();
        double best = kNegInf;
        for (long i = i0; i < n; ++i) {
            double v = bessel_at(i) + p * ls[i] + q * l1s[i];
            best = std::max(best, v);
            terms.push_back(v);
            if (v < best - 46.0) break;
        }
        for (long i = i0 - 1; i >= 0; --i) {
            double v = bessel_at(i) + p * ls[i] + q * l1s[i];
            best = std::max(best, v);
            terms.push_back(v);
            if (v < best - 46.0) break;
        }
        double lint = log_sum_exp(std::span<const double>(terms));
        out[ell] = lf(c) - lf(ell) - lf(c - ell) + lconst + lint;
    }
    renormalize(out);
    return out;
}

Eigen::ArrayXd build_dp_row_table(std::uint64_t c, double beta, LogFactorialTable& lf) {
    Eigen::ArrayXd out(c + 1);
    if (c == 0) {
        out[0] = 0.0;
        return out;
    }
    // ln Gamma(beta + t) accumulated incrementally from t = 0
    std::vector<double> lgam(c + 2);
    lgam[0] = log_gamma(beta);
    for (std::uint64_t t = 0; t <= c; ++t)
        lgam[t + 1] = lgam[t] + std::log(beta + static_cast<double>(t));
    for (std::uint64_t ell = 0; ell <= c; ++ell)
        out[ell] = lf(c) - lf(c - ell) + std::log(beta) + lgam[c - ell] - lgam[c + 1];
    renormalize(out);
    return out;
}

std::uint64_t vkey(std::uint64_t m, std::uint64_t k) { return (m << 24) | k; }

}  // namespace

double log_V(std::uint64_t m, std::uint64_t k, double alpha, double sigma) {
    if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("log_V: sigma outside (0,1)");
    if (!(alpha > 0.0)) throw std::invalid_argument("log_V: alpha must be positive");
    if (k < 1 || k > m + 1) throw std::invalid_argument("log_V: need 1 <= k <= m+1");
    const double md = static_cast<double>(m), kd = static_cast<double>(k);
    const double scale = alpha * std::pow(2.0, sigma - 1.0);
    const double lpref = kd * std::log(scale) - log_gamma(md);
    const double b = scale / sigma;
    const double tail = std::pow(2.0, -sigma);
    auto phi = [=](double u) {
        double x = std::exp(u);
        if (!std::isfinite(x)) return kNegInf;
        double lhalf = std::log(0.5 + x);
        return md * u + (kd * sigma - md) * lhalf
               - b * (std::exp(sigma * lhalf) - tail);
    };
    return lpref + integrate_log_peaked(phi);
}

double VTable::operator()(std::uint64_t m, std::uint64_t k) {
    auto it = cache_.find(vkey(m, k));
    if (it != cache_.end()) return it->second;
    double v = log_V(m, k, alpha_, sigma_);
    cache_.emplace(vkey(m, k), v);
    return v;
}

double nigp_log_pmf(std::uint64_t ell, std::uint64_t m, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("nigp_log_pmf: alpha must be positive");
    if (ell > m) throw std::invalid_argument("nigp_log_pmf: ell exceeds m");
    if (m == 0) return 0.0;
    if (ell == m) return nigp_log_pmf_diag(m, alpha);
    return nigp_log_pmf_offdiag(ell, m, alpha);
}

std::pair<double, double> mc_nigp_pmf(std::uint64_t ell, std::uint64_t m, double alpha,
                                      std::uint64_t n_samples, std::uint64_t seed) {
    if (!(alpha > 0.0)) throw std::invalid_argument("mc_nigp_pmf: alpha must be positive");
    if (ell > m) throw std::invalid_argument("mc_nigp_pmf: ell exceeds m");
    if (n_samples < 10000) throw std::invalid_argument("mc_nigp_pmf: need >= 1e4 samples");
    Rng rng(seed);
    const double nd = static_cast<double>(n_samples);
    double sum = 0.0, sumsq = 0.0;
    double lpref;
    if (ell == m) {
        lpref = log_rising_factorial(0.5, m) - log_gamma(static_cast<double>(m) + 1.0);
        for (std::uint64_t i = 0; i < n_samples; ++i) {
            double y = rng.beta(0.5, static_cast<double>(m) + 0.5);
            double x = 1.0 / (4.0 * rng.exponential());  // tilted IG of order 1/2
            double v = std::exp(-(x / y) * alpha * alpha + alpha);
            sum += v;
            sumsq += v * v;
        }
    } else {
        lpref = log_binomial(m, ell) + log_gamma(static_cast<double>(ell) + 0.5)
                + log_gamma(static_cast<double>(m - ell)) - std::log(kPi)
                - log_gamma(static_cast<double>(m) + 0.5) + alpha + std::log(alpha);
        for (std::uint64_t i = 0; i < n_samples; ++i) {
            double y = rng.beta(static_cast<double>(m - ell), 0.5 + static_cast<double>(ell));
            double v = std::exp(log_bessel_k_int(1, alpha / std::sqrt(y)));
            sum += v;
            sumsq += v * v;
        }
    }
    double mean = sum / nd;
    double var = std::max(0.0, (sumsq - nd * mean * mean) / (nd - 1.0));
    double pref = std::exp(lpref);
    return {pref * mean, pref * std::sqrt(var / nd)};
}

double exact_pmf_enumeration(std::uint64_t ell, std::uint64_t m, double alpha, double sigma) {
    if (m > 10) throw std::invalid_argument("exact_pmf_enumeration: m > 10 not enumerable");
    if (!(sigma > 0.0 && sigma < 1.0))
        throw std::invalid_argument("exact_pmf_enumeration: sigma outside (0,1)");
    if (ell > m) throw std::invalid_argument("exact_pmf_enumeration: ell exceeds m");
    if (m == 0) return ell == 0 ? 1.0 : 0.0;

    VTable vt(alpha, sigma);
    LogFactorialTable lf;
    double total = 0.0;
    std::vector<std::uint64_t> mult(m + 1, 0);

    // recursive enumeration of multiplicity vectors: sum_i i * m_i = m
    std::function<void(std::uint64_t, std::uint64_t)> rec = [&](std::uint64_t size,
                                                                std::uint64_t rem) {
        if (size > m || rem == 0) {
            if (rem != 0) return;
            std::uint64_t k = 0;
            double lw = lf(m);
            for (std::uint64_t i = 1; i <= m; ++i) {
                if (mult[i] == 0) continue;
                k += mult[i];
                lw += static_cast<double>(mult[i])
                          * (log_rising_factorial(1.0 - sigma, i - 1) - lf(i))
                      - lf(mult[i]);
            }
            lw += vt(m, k);
            double pred;
            if (ell == 0)
                pred = std::exp(vt(m + 1, k + 1) - vt(m, k));
            else if (mult[ell] == 0)
                pred = 0.0;
            else
                pred = std::exp(vt(m + 1, k) - vt(m, k))
                       * (static_cast<double>(ell) - sigma) * static_cast<double>(mult[ell]);
            total += std::exp(lw) * pred;
            return;
        }
        for (std::uint64_t cnt = 0; cnt * size <= rem; ++cnt) {
            mult[size] = cnt;
            rec(size + 1, rem - cnt * size);
        }
        mult[size] = 0;
    };
    rec(1, m);
    return total;
}

PosteriorPmf nigp_bucket_posterior(std::uint64_t count, const NigpModel& model) {
    if (!(model.alpha > 0.0)) throw std::invalid_argument("nigp_bucket_posterior: bad alpha");
    if (model.width == 0) throw std::invalid_argument("nigp_bucket_posterior: bad width");
    LogFactorialTable lf;
    return {build_nigp_row_table(count, model.alpha / model.width, lf)};
}

PosteriorPmf nigp_sketch_posterior(const BucketVector& bv, const NigpModel& model) {
    NigpQueryEngine engine(model);
    return engine.sketch_posterior(bv);
}

PosteriorPmf dp_bucket_posterior(std::uint64_t count, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("dp_bucket_posterior: beta must be positive");
    LogFactorialTable lf;
    return {build_dp_row_table(count, beta, lf)};
}

PosteriorPmf dp_sketch_posterior(const BucketVector& bv, double beta) {
    DpQueryEngine engine(beta);
    return engine.sketch_posterior(bv);
}

namespace {

template <typename Builder>
PosteriorPmf product_posterior(const BucketVector& bv, Builder&& table_for) {
    if (bv.empty()) throw std::invalid_argument("sketch_posterior: empty bucket vector");
    const std::uint64_t bound = *std::min_element(bv.begin(), bv.end());
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(bound + 1);
    for (std::uint64_t c : bv) {
        auto table = table_for(c);
        acc += table->head(bound + 1);
    }
    renormalize(acc);
    return {std::move(acc)};
}

}  // namespace

std::shared_ptr<const Eigen::ArrayXd> NigpQueryEngine::row_table(std::uint64_t count) {
    {
        std::shared_lock lock(mutex_);
        auto it = tables_.find(count);
        if (it != tables_.end()) return it->second;
    }
    LogFactorialTable lf;
    auto table = std::make_shared<Eigen::ArrayXd>(
        build_nigp_row_table(count, model_.alpha / model_.width, lf));
    std::unique_lock lock(mutex_);
    auto [it, inserted] = tables_.emplace(count, std::move(table));
    return it->second;
}

PosteriorPmf NigpQueryEngine::sketch_posterior(const BucketVector& bv) {
    return product_posterior(bv, [this](std::uint64_t c) { return row_table(c); });
}

std::shared_ptr<const Eigen::ArrayXd> DpQueryEngine::row_table(std::uint64_t count) {
    {
        std::shared_lock lock(mutex_);
        auto it = tables_.find(count);
        if (it != tables_.end()) return it->second;
    }
    LogFactorialTable lf;
    auto table = std::make_shared<Eigen::ArrayXd>(build_dp_row_table(count, beta_, lf));
    std::unique_lock lock(mutex_);
    auto [it, inserted] = tables_.emplace(count, std::move(table));
    return it->second;
}

PosteriorPmf DpQueryEngine::sketch_posterior(const BucketVector& bv) {
    return product_posterior(bv, [this](std::uint64_t c) { return row_table(c); });
}

double posterior_mean(const PosteriorPmf& pmf) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < pmf.log_probs.size(); ++i)
        acc += static_cast<double>(i) * std::exp(pmf.log_probs[i]);
    return acc;
}

std::uint64_t posterior_median(const PosteriorPmf& pmf) {
    double cdf = 0.0;
    for (Eigen::Index i = 0; i < pmf.log_probs.size(); ++i) {
        cdf += std::exp(pmf.log_probs[i]);
        if (cdf >= 0.5) return static_cast<std::uint64_t>(i);
    }
    return pmf.support_bound();
}

std::uint64_t posterior_mode(const PosteriorPmf& pmf) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < pmf.log_probs.size(); ++i)
        if (pmf.log_probs[i] > pmf.log_probs[best]) best = i;  // ties keep the smallest
    return static_cast<std::uint64_t>(best);
}

std::pair<std::uint64_t, std::uint64_t> credible_interval(const PosteriorPmf& pmf, double mass) {
    if (!(mass > 0.0 && mass < 1.0)) throw std::invalid_argument("credible_interval: bad mass");
    const double lo_target = 0.5 * (1.0 - mass);
    const double hi_target = 1.0 - lo_target;
    double cdf = 0.0;
    std::uint64_t lo = 0, hi = pmf.support_bound();
    bool lo_set = false;
    for (Eigen::Index i = 0; i < pmf.log_probs.size(); ++i) {
        cdf += std::exp(pmf.log_probs[i]);
        if (!lo_set && cdf >= lo_target) {
            lo = static_cast<std::uint64_t>(i);
            lo_set = true;
        }
        if (cdf >= hi_target) {
            hi = static_cast<std::uint64_t>(i);
            break;
        }
    }
    return {lo, hi};
}

}  // namespace cmsn
