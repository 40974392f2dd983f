#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cmsn/hashing.hpp"

namespace cmsn {

// hashed counts {c_n} of one queried token, one entry per row
using BucketVector = std::vector<std::uint64_t>;

// Count-min sketch: depth x width table of counters plus the hash family.
// Row sums all equal the total token count; counters never decrease.
class Sketch {
public:
    Sketch(std::uint64_t seed, std::uint32_t depth, std::uint32_t width);

    const HashFamily& family() const { return family_; }
    std::uint32_t depth() const { return family_.depth(); }
    std::uint32_t width() const { return family_.width(); }
    std::uint64_t total() const { return total_; }

    void update(std::string_view token) { update(fingerprint(token)); }
    void update(TokenFingerprint fp);

    BucketVector bucket_vector(std::string_view token) const {
        return bucket_vector(fingerprint(token));
    }
    BucketVector bucket_vector(TokenFingerprint fp) const;

    std::uint64_t count_at(std::uint32_t row, std::uint32_t col) const {
        return counts_[static_cast<std::size_t>(row) * width() + col];
    }
    // one row of counters (length = width)
    std::vector<std::uint64_t> row(std::uint32_t n) const;

    void merge(const Sketch& other);

    std::vector<unsigned char> serialize() const;
    static Sketch deserialize(const std::vector<unsigned char>& bytes);
    void save(const std::string& path) const;
    static Sketch load(const std::string& path);

    friend bool operator==(const Sketch& a, const Sketch& b) {
        return a.family_ == b.family_ && a.total_ == b.total_ && a.counts_ == b.counts_;
    }

private:
    HashFamily family_;
    std::vector<std::uint64_t> counts_;  // row-major depth x width
    std::uint64_t total_ = 0;
};

inline Sketch new_sketch(std::uint64_t seed, std::uint32_t depth, std::uint32_t width) {
    return Sketch(seed, depth, width);
}

// row minimum (the classical upper-bounding estimate)
std::uint64_t estimate_cms(const BucketVector& bv);

// count-mean-min: per-row collision correction c - (m-c)/(J-1) clamped at 0,
// median across rows, capped by the row minimum; J = 1 degenerates to the min
double estimate_cmm(const BucketVector& bv, std::uint64_t total, std::uint32_t width);

}  // namespace cmsn
