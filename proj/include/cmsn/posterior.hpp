#pragma once

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cmsn/sketch.hpp"

namespace cmsn {

// Calibrated prior state.  sigma is pinned at 1/2: that is the one stability
// index with both the restriction and finite-dimensional projective
// properties, and the only one whose posterior has a closed Bessel form.
struct NigpModel {
    double alpha = 1.0;
    std::uint32_t width = 1;
    static constexpr double sigma = 0.5;
};

// Normalized log-space pmf over candidate frequencies 0..L.
struct PosteriorPmf {
    Eigen::ArrayXd log_probs;

    std::uint64_t support_bound() const { return static_cast<std::uint64_t>(log_probs.size()) - 1; }
};

double posterior_mean(const PosteriorPmf& pmf);
std::uint64_t posterior_median(const PosteriorPmf& pmf);
std::uint64_t posterior_mode(const PosteriorPmf& pmf);
// equal-tailed credible interval at the given mass
std::pair<std::uint64_t, std::uint64_t> credible_interval(const PosteriorPmf& pmf,
                                                          double mass = 0.95);

// ln V_{m,k}: the partition-weight integral over (0, infinity)
double log_V(std::uint64_t m, std::uint64_t k, double alpha, double sigma);

// (m,k)-keyed cache of ln V_{m,k} for fixed (alpha, sigma)
class VTable {
public:
    VTable(double alpha, double sigma) : alpha_(alpha), sigma_(sigma) {}

    double alpha() const { return alpha_; }
    double sigma() const { return sigma_; }
    double operator()(std::uint64_t m, std::uint64_t k);

private:
    double alpha_, sigma_;
    std::unordered_map<std::uint64_t, double> cache_;
};

// ln p_{f_v}(ell; m, alpha): marginal probability that a token has frequency
// ell when the bucket holding it has total m, under prior mass alpha
double nigp_log_pmf(std::uint64_t ell, std::uint64_t m, double alpha);

// Monte Carlo evaluation of the same pmf by Beta / tilted-inverse-Gaussian
// sampling; returns {estimate, standard_error}
std::pair<double, double> mc_nigp_pmf(std::uint64_t ell, std::uint64_t m, double alpha,
                                      std::uint64_t n_samples, std::uint64_t seed);

// Exact sum over all multiplicity vectors (partitions of m), usable for any
// sigma in (0,1); rejected for m > 10 to keep the enumeration bounded
double exact_pmf_enumeration(std::uint64_t ell, std::uint64_t m, double alpha, double sigma);

PosteriorPmf nigp_bucket_posterior(std::uint64_t count, const NigpModel& model);
PosteriorPmf nigp_sketch_posterior(const BucketVector& bv, const NigpModel& model);

// closed-form bucket posterior under the Dirichlet-process baseline with
// bucket mass beta = alpha_dp / J
PosteriorPmf dp_bucket_posterior(std::uint64_t count, double beta);
PosteriorPmf dp_sketch_posterior(const BucketVector& bv, double beta);

// Shared-cache evaluator for batch queries: per-row log-pmf tables are
// computed once per distinct bucket count and reused across tokens.  prepare()
// may be called from several threads; lookups after that are lock-free reads.
class NigpQueryEngine {
public:
    explicit NigpQueryEngine(NigpModel model) : model_(model) {}

    const NigpModel& model() const { return model_; }
    // normalized log pmf over 0..count for a single row
    std::shared_ptr<const Eigen::ArrayXd> row_table(std::uint64_t count);
    PosteriorPmf sketch_posterior(const BucketVector& bv);

private:
    NigpModel model_;
    std::shared_mutex mutex_;
    std::unordered_map<std::uint64_t, std::shared_ptr<const Eigen::ArrayXd>> tables_;
};

class DpQueryEngine {
public:
    explicit DpQueryEngine(double beta) : beta_(beta) {}

    double beta() const { return beta_; }
    std::shared_ptr<const Eigen::ArrayXd> row_table(std::uint64_t count);
    PosteriorPmf sketch_posterior(const BucketVector& bv);

private:
    double beta_;
    std::shared_mutex mutex_;
    std::unordered_map<std::uint64_t, std::shared_ptr<const Eigen::ArrayXd>> tables_;
};

}  // namespace cmsn
