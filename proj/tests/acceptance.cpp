// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Run through ctest or directly; a criterion number as argv[1]
// runs that criterion alone.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "cmsn/experiment.hpp"
#include "cmsn/gen_factorial.hpp"
#include "cmsn/likelihood.hpp"
#include "cmsn/logspace.hpp"
#include "cmsn/posterior.hpp"
#include "cmsn/sketch.hpp"
#include "cmsn/special.hpp"
#include "cmsn/streams.hpp"

using namespace cmsn;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct Failure {
    std::string detail;
};

std::vector<std::string> g_notes;

void require(bool ok, const std::string& detail) {
    if (!ok) throw Failure{detail};
    g_notes.push_back(detail);
}

// 1. pmf normalization over a grid of (m, alpha)
void criterion1() {
    for (std::uint64_t m : {1, 5, 20, 100}) {
        for (double alpha : {0.1, 1.0, 10.0, 100.0}) {
            double total = 0.0;
            for (std::uint64_t ell = 0; ell <= m; ++ell)
                total += std::exp(nigp_log_pmf(ell, m, alpha));
            char buf[128];
            std::snprintf(buf, sizeof buf, "m=%llu alpha=%g sum=%.12f",
                          static_cast<unsigned long long>(m), alpha, total);
            require(std::abs(total - 1.0) <= 1e-8, buf);
        }
    }
}

// 2. oracle triangle: analytic pmf vs partition enumeration vs Monte Carlo
void criterion2() {
    for (double alpha : {0.5, 2.0}) {
        for (std::uint64_t m = 1; m <= 8; ++m) {
            for (std::uint64_t ell = 0; ell <= m; ++ell) {
                double analytic = std::exp(nigp_log_pmf(ell, m, alpha));
                double enumerated = exact_pmf_enumeration(ell, m, alpha, 0.5);
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              "ell=%llu m=%llu alpha=%g analytic=%.9f enum=%.9f",
                              static_cast<unsigned long long>(ell),
                              static_cast<unsigned long long>(m), alpha, analytic, enumerated);
                require(std::abs(analytic - enumerated) <= 1e-6, buf);

                auto [mc, se] = mc_nigp_pmf(ell, m, alpha, 100000, 31 + m * 131 + ell);
                std::snprintf(buf, sizeof buf,
                              "ell=%llu m=%llu alpha=%g analytic=%.9f mc=%.9f se=%.2e",
                              static_cast<unsigned long long>(ell),
                              static_cast<unsigned long long>(m), alpha, analytic, mc, se);
                require(std::abs(mc - analytic) <= 3.0 * se + 1e-12, buf);
            }
        }
    }
}

// 3. marginal likelihood: composition normalization + generative frequency
void criterion3() {
    auto compositions = [](std::uint64_t m, std::size_t j) {
        std::vector<std::vector<std::uint64_t>> out;
        std::vector<std::uint64_t> cur;
        std::function<void(std::uint64_t, std::size_t)> rec = [&](std::uint64_t rem,
                                                                  std::size_t left) {
            if (left == 1) {
                cur.push_back(rem);
                out.push_back(cur);
                cur.pop_back();
                return;
            }
            for (std::uint64_t c = 0; c <= rem; ++c) {
                cur.push_back(c);
                rec(rem - c, left - 1);
                cur.pop_back();
            }
        };
        rec(m, j);
        return out;
    };

    for (auto [m, J] : std::vector<std::pair<std::uint64_t, std::uint32_t>>{{3, 2}, {4, 3}}) {
        double total = 0.0;
        for (const auto& comp : compositions(m, J))
            total += std::exp(log_marginal_likelihood({comp}, m, 1.7, J));
        char buf[96];
        std::snprintf(buf, sizeof buf, "m=%llu J=%u composition sum=%.9f",
                      static_cast<unsigned long long>(m), J, total);
        require(std::abs(total - 1.0) <= 1e-6, buf);
    }

    const double alpha = 2.0;
    const std::uint64_t draws = 100000;
    std::uint64_t hits = 0;
    for (std::uint64_t s = 0; s < draws; ++s) {
        CountRows rows = sample_bucket_rows(alpha, 2, 1, 3, 40000 + s);
        if (rows[0][0] == 3 && rows[0][1] == 0) ++hits;
    }
    double emp = static_cast<double>(hits) / static_cast<double>(draws);
    double pred = std::exp(log_marginal_likelihood({{3, 0}}, 3, alpha, 2));
    double se = std::sqrt(emp * (1.0 - emp) / static_cast<double>(draws));
    char buf[96];
    std::snprintf(buf, sizeof buf, "generative emp=%.5f pred=%.5f se=%.5f", emp, pred, se);
    require(std::abs(emp - pred) <= 3.0 * se, buf);
}

// 4. alpha recovery from synthetic buckets
void criterion4() {
    const double alpha_star = 50.0;
    std::vector<double> hats;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        CountRows rows = sample_bucket_rows(alpha_star, 100, 4, 100000, 1234 + seed);
        hats.push_back(estimate_alpha(rows, 100000, 100).alpha_hat);
    }
    std::sort(hats.begin(), hats.end());
    double median = 0.5 * (hats[9] + hats[10]);
    char buf[96];
    std::snprintf(buf, sizeof buf, "median alpha_hat=%.3f (target 50 +- 30%%)", median);
    require(median >= 35.0 && median <= 65.0, buf);
}

// 5. estimation guarantee at eps = 0.01, delta = 0.05
void criterion5() {
    const double eps = 0.01, delta = 0.05;
    const std::uint32_t J = static_cast<std::uint32_t>(std::ceil(std::exp(1.0) / eps));
    const std::uint32_t N = static_cast<std::uint32_t>(std::ceil(std::log(1.0 / delta)));
    require(J == 272 && N == 3, "J=272 N=3 from the guarantee sizing");

    const std::uint64_t m = 10000;
    std::uint64_t trials = 0, within = 0;
    for (std::uint64_t rep = 0; rep < 200; ++rep) {
        Sketch sketch(9000 + rep, N, J);
        ExactCounter exact;
        ZipfStream zipf(1.3, 600 + rep);
        for (std::uint64_t i = 0; i < m; ++i) {
            std::string tok = zipf.next_token();
            sketch.update(tok);
            exact.add(tok);
        }
        for (const auto& [tok, freq] : exact.counts()) {
            std::uint64_t est = estimate_cms(sketch.bucket_vector(tok));
            if (est < freq) throw Failure{"overcount violated for " + tok};
            ++trials;
            if (static_cast<double>(est) <= static_cast<double>(freq) + eps * m) ++within;
        }
    }
    double frac = static_cast<double>(within) / static_cast<double>(trials);
    double threshold = 1.0 - delta
                       - 3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(trials));
    char buf[128];
    std::snprintf(buf, sizeof buf, "within-bound fraction %.5f over %llu trials (needs >= %.5f)",
                  frac, static_cast<unsigned long long>(trials), threshold);
    require(frac >= threshold, buf);
}

// 6. power-law asymptotics of the partition sampler
void criterion6() {
    const std::uint64_t m = 10000;
    int singleton_ok = 0;
    std::vector<double> slopes;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        PartitionSample ps = nggp_sample_partition(m, 1.0, 0.5, 7600 + seed);
        double share = static_cast<double>(ps.stats.multiplicities[0])
                       / static_cast<double>(ps.stats.k);
        if (share >= 0.45 && share <= 0.55) ++singleton_ok;

        // regression of ln K on ln m over checkpoints in [1e3, 1e4]
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (std::uint64_t cp = 1000; cp <= 10000; cp += 450) {
            double x = std::log(static_cast<double>(cp));
            double y = std::log(static_cast<double>(ps.k_trajectory[cp - 1]));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++n;
        }
        slopes.push_back((n * sxy - sx * sy) / (n * sxx - sx * sx));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "singleton share in [0.45,0.55] for %d/20 seeds", singleton_ok);
    require(singleton_ok >= 18, buf);

    double mean_slope = 0.0;
    for (double s : slopes) mean_slope += s;
    mean_slope /= static_cast<double>(slopes.size());
    std::snprintf(buf, sizeof buf, "mean ln K_m ~ ln m slope %.4f (target 0.5 +- 0.1)",
                  mean_slope);
    require(std::abs(mean_slope - 0.5) <= 0.1, buf);
}

// 7. synthetic MAE reproduction at s = 1.9, J = 160, N = 4
void criterion7() {
    ExperimentConfig cfg;
    cfg.stream.kind = StreamKind::Zipf;
    cfg.stream.s = 1.9;
    cfg.stream.length = 500000;
    cfg.stream.seed = 3;
    cfg.sketch_seed = 2;
    cfg.depth = 4;
    cfg.width = 160;
    MaeReport report = run_experiment(cfg);

    double nigp_low = report.at("(0,1]", "nigp").mae;
    double dp_low = report.at("(0,1]", "dp").mae;
    double nigp_high = report.at("(128,256]", "nigp").mae;
    std::vector<std::string> problems;
    char buf[192];

    std::snprintf(buf, sizeof buf, "NIGP MAE (0,1] = %.4f (needs <= 2)", nigp_low);
    std::printf("       %s %s\n", nigp_low <= 2.0 ? "[ok]  " : "[FAIL]", buf);
    if (!(nigp_low <= 2.0)) problems.push_back(buf);

    std::snprintf(buf, sizeof buf, "DP MAE (0,1] = %.2f vs 50x NIGP = %.2f", dp_low,
                  50.0 * nigp_low);
    std::printf("       %s %s\n", dp_low >= 50.0 * nigp_low ? "[ok]  " : "[FAIL]", buf);
    if (!(dp_low >= 50.0 * nigp_low)) problems.push_back(buf);

    std::snprintf(buf, sizeof buf, "NIGP MAE (128,256] = %.2f (needs [120,260])", nigp_high);
    std::printf("       %s %s\n", nigp_high >= 120.0 && nigp_high <= 260.0 ? "[ok]  " : "[FAIL]",
                buf);
    if (!(nigp_high >= 120.0 && nigp_high <= 260.0)) problems.push_back(buf);

    bool low_ok = true;
    for (const std::string& bin : {"(0,1]", "(1,2]", "(2,4]", "(4,8]", "(8,16]", "(16,32]"}) {
        double nigp = report.at(bin, "nigp").mae;
        double dp = report.at(bin, "dp").mae;
        if (!(nigp < dp)) {
            low_ok = false;
            std::snprintf(buf, sizeof buf, "bin %s: NIGP %.3f not below DP %.3f", bin.c_str(),
                          nigp, dp);
            problems.push_back(buf);
        }
    }
    std::printf("       %s NIGP below DP on every bin through (16,32]\n",
                low_ok ? "[ok]  " : "[FAIL]");

    // Supplementary (not gated): the same pipeline under heavy collisions.
    // The exact unbounded sampler at s = 1.9 yields ~1.4e3 distinct tokens and
    // row-minimum noise ~25 counts, which caps the DP:NIGP MAE ratio near 50
    // regardless of calibration; at s = 1.3 the stream carries ~3e4 distinct
    // tokens and the separation opens up by more than an order of magnitude.
    cfg.stream.s = 1.3;
    MaeReport heavy = run_experiment(cfg);
    std::printf("       [info] s=1.3 collision-matched run: NIGP (0,1] = %.2f, DP (0,1] = %.2f"
                " (ratio %.0fx), NIGP (128,256] = %.1f\n",
                heavy.at("(0,1]", "nigp").mae, heavy.at("(0,1]", "dp").mae,
                heavy.at("(0,1]", "dp").mae / heavy.at("(0,1]", "nigp").mae,
                heavy.at("(128,256]", "nigp").mae);

    if (!problems.empty()) throw Failure{problems.front()};
}

// 8. invariant bundle
void criterion8() {
    // shrinkage on a full (smaller) experiment run; the runner itself aborts
    // on any posterior mean above the row minimum
    ExperimentConfig cfg;
    cfg.stream.kind = StreamKind::Zipf;
    cfg.stream.s = 1.9;
    cfg.stream.length = 20000;
    cfg.stream.seed = 77;
    cfg.sketch_seed = 3;
    cfg.depth = 4;
    cfg.width = 160;
    cfg.estimators = {true, false, false, true};
    run_experiment(cfg);
    require(true, "bounded-support shrinkage enforced over a full run");

    // merge homomorphism on 1e4-token streams
    Sketch a(5, 3, 64), b(5, 3, 64), whole(5, 3, 64);
    ZipfStream zipf(1.6, 4);
    for (int i = 0; i < 10000; ++i) {
        std::string tok = zipf.next_token();
        (i < 5000 ? a : b).update(tok);
        whole.update(tok);
    }
    a.merge(b);
    require(a.serialize() == whole.serialize(), "merge equals sketch of concatenated streams");

    // serialization round trip
    Sketch back = Sketch::deserialize(whole.serialize());
    require(back == whole, "serialization round trip");

    // order-1/2 closed form
    double expected = 0.5 * std::log(kPi / 4.0) - 2.0;
    require(std::abs(log_bessel_k_half(1, 2.0) - expected) <= 1e-12 * std::abs(expected),
            "half-integer Bessel closed form at order 1/2");

    // generalized factorial sigma -> 0 limit
    GenFactorialTable tiny(1e-6, 5);
    double scaled = std::exp(tiny.log_c(3, 2) - 2.0 * std::log(1e-6));
    require(std::abs(scaled - 3.0) <= 1e-4 * 3.0, "Stirling limit of C(3,2;sigma)");
}

struct Criterion {
    int number;
    const char* label;
    std::function<void()> body;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "posterior pmf normalization", criterion1},
        {2, "oracle triangle (analytic / enumeration / Monte Carlo)", criterion2},
        {3, "marginal-likelihood normalization and generative match", criterion3},
        {4, "alpha recovery within 30 percent", criterion4},
        {5, "classical estimation guarantee (eps=0.01, delta=0.05)", criterion5},
        {6, "power-law asymptotics (singleton share, growth slope)", criterion6},
        {7, "synthetic MAE table reproduction (s=1.9, J=160, N=4)", criterion7},
        {8, "invariant suite", criterion8},
    };

    int only = (argc > 1) ? std::atoi(argv[1]) : 0;
    int failures = 0;
    for (const Criterion& c : criteria) {
        if (only != 0 && c.number != only) continue;
        auto t0 = std::chrono::steady_clock::now();
        g_notes.clear();
        try {
            c.body();
            double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::printf("[PASS] criterion %d: %s (%.1fs)\n", c.number, c.label, secs);
        } catch (const Failure& f) {
            double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::printf("[FAIL] criterion %d: %s (%.1fs)\n       %s\n", c.number, c.label, secs,
                        f.detail.c_str());
            ++failures;
        } catch (const std::exception& e) {
            std::printf("[FAIL] criterion %d: %s\n       unexpected error: %s\n", c.number,
                        c.label, e.what());
            ++failures;
        }
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
