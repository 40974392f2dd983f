#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace cmsn {

// splitmix64: the counter-based generator used for all seed expansion.
// state advances by the golden-ratio increment; output is the mixed state.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct TokenFingerprint {
    std::uint64_t value = 0;
    friend bool operator==(TokenFingerprint, TokenFingerprint) = default;
};

// FNV-1a 64-bit fold of the token bytes followed by a splitmix64-style
// avalanche; stable across platforms (documented in docs/format.md).
TokenFingerprint fingerprint(std::string_view token);
TokenFingerprint fingerprint(std::span<const unsigned char> token);

// Carter-Wegman 2-universal family h_n(x) = ((a_n x + b_n) mod p) mod J over
// the Mersenne prime p = 2^61 - 1, with (a_n, b_n) expanded from the seed.
class HashFamily {
public:
    static constexpr std::uint64_t kPrime = (1ULL << 61) - 1;

    HashFamily(std::uint64_t seed, std::uint32_t depth, std::uint32_t width);

    std::uint64_t seed() const { return seed_; }
    std::uint32_t depth() const { return depth_; }
    std::uint32_t width() const { return width_; }
    std::uint64_t row_a(std::uint32_t n) const { return rows_[n].a; }
    std::uint64_t row_b(std::uint32_t n) const { return rows_[n].b; }

    // bucket index in [0, width) for row n
    std::uint32_t bucket(std::uint32_t row, TokenFingerprint fp) const;

    friend bool operator==(const HashFamily& x, const HashFamily& y) {
        return x.seed_ == y.seed_ && x.depth_ == y.depth_ && x.width_ == y.width_;
    }

private:
    struct Row {
        std::uint64_t a, b;
    };
    std::uint64_t seed_;
    std::uint32_t depth_, width_;
    std::vector<Row> rows_;
};

inline HashFamily make_hash_family(std::uint64_t seed, std::uint32_t depth, std::uint32_t width) {
    return HashFamily(seed, depth, width);
}

inline std::uint32_t hash_row(const HashFamily& family, std::uint32_t row, TokenFingerprint fp) {
    return family.bucket(row, fp);
}

}  // namespace cmsn
