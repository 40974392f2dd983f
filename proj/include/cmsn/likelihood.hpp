#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cmsn/sketch.hpp"
#include "cmsn/special.hpp"

namespace cmsn {

using CountRows = std::vector<std::vector<std::uint64_t>>;

struct AlphaEstimate {
    double alpha_hat = 0.0;
    double log_likelihood_at_hat = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    int iterations = 0;
    bool tolerance_met = false;
};

// Log-factorials shared across likelihood evaluations; per-(alpha, node)
// Bessel values are deduplicated over the distinct bucket counts of each row.
struct LikelihoodCache {
    LogFactorialTable log_factorials;
};

// ln of the hashed-bucket marginal likelihood under the power-law prior:
// product over rows of V_{n,m,alpha,J} times the Bessel-product integral.
// Every row must sum to m.
double log_marginal_likelihood(const CountRows& rows, std::uint64_t m, double alpha,
                               std::uint32_t width);
double log_marginal_likelihood(const CountRows& rows, std::uint64_t m, double alpha,
                               std::uint32_t width, LikelihoodCache& cache);

// Dirichlet-multinomial marginal likelihood of the rows under the DP
// baseline prior with total mass alpha (bucket mass alpha / J).
double dp_log_marginal_likelihood(const CountRows& rows, std::uint64_t m, double alpha,
                                  std::uint32_t width);

// Empirical-Bayes calibration: exponential grid 2^-6..2^24 brackets the
// maximizer, then golden-section search to 1e-3 absolute in alpha.  A
// boundary maximizer raises an error rather than silently widening the grid.
AlphaEstimate estimate_alpha(const Sketch& sketch);
AlphaEstimate estimate_alpha(const CountRows& rows, std::uint64_t m, std::uint32_t width);
AlphaEstimate estimate_alpha_dp(const Sketch& sketch);
AlphaEstimate estimate_alpha_dp(const CountRows& rows, std::uint64_t m, std::uint32_t width);

// Generative oracle for the marginal likelihood: per row, J independent
// inverse-Gaussian(alpha/J, 1) weights normalized to probabilities, then a
// multinomial of size m.
CountRows sample_bucket_rows(double alpha, std::uint32_t width, std::uint32_t depth,
                             std::uint64_t m, std::uint64_t seed);

namespace detail {
// dedup=false recomputes the Bessel factor for every bucket; used to check
// cache soundness
double log_marginal_likelihood_row(const std::vector<std::uint64_t>& row, std::uint64_t m,
                                   double alpha, std::uint32_t width, LikelihoodCache& cache,
                                   bool dedup);
}  // namespace detail

}  // namespace cmsn
