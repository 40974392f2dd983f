#include "cmsn/hashing.hpp"

#include <stdexcept>

namespace cmsn {

namespace {

std::uint64_t fnv1a_splitmix(const unsigned char* data, std::size_t len) {
    std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV offset basis
    for (std::size_t i = 0; i < len; ++i) {
        h ^= data[i];
        h *= 0x100000001B3ULL;  // FNV prime
    }
    // splitmix64-style finalizer
    h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
    h = (h ^ (h >> 27)) * 0x94D049BB133111EBULL;
    return h ^ (h >> 31);
}

// reduce a 64-bit value into [0, 2^61 - 1)
std::uint64_t mod_mersenne61(std::uint64_t x) {
    constexpr std::uint64_t p = HashFamily::kPrime;
    std::uint64_t r = (x & p) + (x >> 61);
    if (r >= p) r -= p;
    return r;
}

std::uint64_t mul_add_mod(std::uint64_t a, std::uint64_t x, std::uint64_t b) {
    constexpr std::uint64_t p = HashFamily::kPrime;
    unsigned __int128 t = static_cast<unsigned __int128>(a) * x + b;
    std::uint64_t r = static_cast<std::uint64_t>(t & p) + static_cast<std::uint64_t>(t >> 61);
    r = (r & p) + (r >> 61);
    if (r >= p) r -= p;
    return r;
}

// rejection-sampled uniform draw in [0, bound) from the splitmix64 stream
std::uint64_t draw_below(std::uint64_t& state, std::uint64_t bound) {
    const std::uint64_t limit = ~0ULL - (~0ULL % bound + 1) % bound;
    for (;;) {
        std::uint64_t r = splitmix64_next(state);
        if (r <= limit) return r % bound;
    }
}

}  // namespace

TokenFingerprint fingerprint(std::string_view token) {
    if (token.empty()) throw std::invalid_argument("fingerprint: empty token");
    return {fnv1a_splitmix(reinterpret_cast<const unsigned char*>(token.data()), token.size())};
}

TokenFingerprint fingerprint(std::span<const unsigned char> token) {
    if (token.empty()) throw std::invalid_argument("fingerprint: empty token");
    return {fnv1a_splitmix(token.data(), token.size())};
}

HashFamily::HashFamily(std::uint64_t seed, std::uint32_t depth, std::uint32_t width)
    : seed_(seed), depth_(depth), width_(width) {
    if (depth == 0 || width == 0)
        throw std::invalid_argument("HashFamily: depth and width must be >= 1");
    std::uint64_t state = seed;
    rows_.reserve(depth);
    for (std::uint32_t n = 0; n < depth; ++n) {
        std::uint64_t a = 1 + draw_below(state, kPrime - 1);  // a in [1, p)
        std::uint64_t b = draw_below(state, kPrime);          // b in [0, p)
        rows_.push_back({a, b});
    }
}

std::uint32_t HashFamily::bucket(std::uint32_t row, TokenFingerprint fp) const {
    if (row >= depth_) throw std::out_of_range("HashFamily::bucket: row out of range");
    std::uint64_t x = mod_mersenne61(fp.value);
    return static_cast<std::uint32_t>(mul_add_mod(rows_[row].a, x, rows_[row].b) % width_);
}

}  // namespace cmsn
