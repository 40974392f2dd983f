#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "cmsn/hashing.hpp"

using namespace cmsn;

namespace {
// chi-square 99.9% quantiles, frozen from a reference implementation
constexpr double kChi2_15 = 37.69729821835383;
constexpr double kChi2_63 = 103.44237731987324;
constexpr double kChi2_159 = 219.8460461433745;

double chi_square(const std::vector<std::uint64_t>& observed, double expected) {
    double stat = 0.0;
    for (std::uint64_t o : observed) {
        double d = static_cast<double>(o) - expected;
        stat += d * d / expected;
    }
    return stat;
}
}  // namespace

TEST_CASE("fingerprint determinism and distinctness") {
    CHECK(fingerprint("cat") == fingerprint("cat"));
    CHECK(fingerprint("cat").value != fingerprint("dog").value);
    CHECK(fingerprint("enron").value == fingerprint(std::string("enron")).value);

    std::set<std::uint64_t> seen;
    for (int i = 0; i < 10000; ++i) seen.insert(fingerprint("word" + std::to_string(i)).value);
    CHECK(seen.size() == 10000);  // zero collisions on the corpus

    CHECK_THROWS_AS(fingerprint(""), std::invalid_argument);
}

TEST_CASE("hash family construction") {
    HashFamily f1 = make_hash_family(42, 2, 320);
    HashFamily f2 = make_hash_family(42, 2, 320);
    CHECK(f1 == f2);
    for (std::uint32_t n = 0; n < 2; ++n) {
        CHECK(f1.row_a(n) == f2.row_a(n));
        CHECK(f1.row_b(n) == f2.row_b(n));
        CHECK(f1.row_a(n) >= 1);
        CHECK(f1.row_a(n) < HashFamily::kPrime);
        CHECK(f1.row_b(n) < HashFamily::kPrime);
    }
    CHECK_THROWS_AS(make_hash_family(1, 0, 8), std::invalid_argument);
    CHECK_THROWS_AS(make_hash_family(1, 2, 0), std::invalid_argument);
}

TEST_CASE("hash_row determinism, range, degenerate width") {
    HashFamily fam = make_hash_family(7, 4, 53);
    TokenFingerprint fp = fingerprint("token");
    for (std::uint32_t n = 0; n < 4; ++n) {
        std::uint32_t h = hash_row(fam, n, fp);
        CHECK(h == hash_row(fam, n, fp));
        CHECK(h < 53);
    }
    CHECK_THROWS_AS(hash_row(fam, 4, fp), std::out_of_range);

    HashFamily one = make_hash_family(7, 3, 1);
    for (std::uint32_t n = 0; n < 3; ++n) CHECK(hash_row(one, n, fp) == 0);
}

TEST_CASE("empirical collision rate matches 1/J") {
    const std::uint32_t J = 320;
    const int trials = 10000;
    int collisions = 0;
    std::uint64_t state = 99;
    for (int t = 0; t < trials; ++t) {
        HashFamily fam(splitmix64_next(state), 1, J);
        TokenFingerprint x{splitmix64_next(state)};
        TokenFingerprint y{splitmix64_next(state)};
        if (x.value == y.value) continue;
        if (fam.bucket(0, x) == fam.bucket(0, y)) ++collisions;
    }
    double p = 1.0 / J;
    double se = std::sqrt(p * (1 - p) / trials);
    CHECK(std::abs(collisions / static_cast<double>(trials) - p) < 3 * se);
}

TEST_CASE("bucket occupancy is uniform (chi-square)") {
    const std::uint32_t J = 160;
    HashFamily fam(2024, 1, J);
    std::vector<std::uint64_t> occ(J, 0);
    std::uint64_t state = 5;
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++occ[fam.bucket(0, TokenFingerprint{splitmix64_next(state)})];
    CHECK(chi_square(occ, static_cast<double>(n) / J) < kChi2_159);
}

TEST_CASE("fixed fingerprint is uniform across seeds (chi-square)") {
    const std::uint32_t J = 16;
    TokenFingerprint fp = fingerprint("pivot");
    std::vector<std::uint64_t> occ(J, 0);
    for (std::uint64_t seed = 0; seed < 1000; ++seed)
        ++occ[HashFamily(seed, 1, J).bucket(0, fp)];
    CHECK(chi_square(occ, 1000.0 / J) < kChi2_15);
}

TEST_CASE("pairwise independence proxy over seeds") {
    const std::uint32_t J = 8;
    TokenFingerprint x = fingerprint("left");
    TokenFingerprint y = fingerprint("right");
    std::vector<std::uint64_t> joint(J * J, 0);
    const int seeds = 20000;
    for (int seed = 0; seed < seeds; ++seed) {
        HashFamily fam(static_cast<std::uint64_t>(seed) + 1, 1, J);
        ++joint[fam.bucket(0, x) * J + fam.bucket(0, y)];
    }
    CHECK(chi_square(joint, static_cast<double>(seeds) / (J * J)) < kChi2_63);
}
