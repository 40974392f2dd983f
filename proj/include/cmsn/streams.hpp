#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cmsn/rng.hpp"

namespace cmsn {

enum class StreamKind { Zipf, TextFile, BagOfWordsFile, Nggp, Dp };
enum class TextFormat { Plain, UciBagOfWords };

struct StreamSpec {
    StreamKind kind = StreamKind::Zipf;
    double s = 2.0;        // zipf exponent
    double sigma = 0.5;    // nggp stability
    double alpha = 1.0;    // nggp mass
    double beta = 1.0;     // dp mass
    std::uint64_t length = 0;
    std::uint64_t seed = 0;
    std::string path;      // text sources
};

// Exact i.i.d. Zipf(s) sampler over unbounded positive-integer ranks,
// by rejection from the dominating pair of curves; requires s > 1.
class ZipfStream {
public:
    ZipfStream(double s, std::uint64_t seed);
    std::uint64_t next_rank();
    std::string next_token() { return std::to_string(next_rank()); }

private:
    double s_, b_;
    Rng rng_;
};

// Streams tokens from a file into the sink.  Plain text is lowercased and
// split on non-alphanumeric runs; UCI bag-of-words files ("D W NNZ" header
// then "docID wordID count" lines) emit each wordID `count` times.
void for_each_token(const std::string& path, TextFormat format,
                    const std::function<void(std::string_view)>& sink);

// exact frequency map, the ground truth for error measurement
class ExactCounter {
public:
    void add(std::string_view token);
    std::uint64_t count(const std::string& token) const;
    std::uint64_t total() const { return total_; }
    std::uint64_t distinct() const { return counts_.size(); }
    const std::unordered_map<std::string, std::uint64_t>& counts() const { return counts_; }

private:
    std::unordered_map<std::string, std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

struct PartitionStats {
    std::uint64_t m = 0;
    std::uint64_t k = 0;
    std::vector<std::uint64_t> multiplicities;  // index r-1 holds M_{r,m}

    void validate() const;  // throws NumericError if the identities fail
};

struct PartitionSample {
    PartitionStats stats;
    std::vector<std::uint64_t> block_sizes;
    std::vector<std::uint64_t> k_trajectory;  // K after 1..m tokens
};

// Sequential sampler of the power-law partition via the predictive rule:
// new block with probability V_{m+1,k+1}/V_{m,k}, an existing block of size
// n_i with probability (V_{m+1,k}/V_{m,k})(n_i - sigma).  Each step checks
// that the two pieces sum to one within 1e-8.
PartitionSample nggp_sample_partition(std::uint64_t m, double alpha, double sigma,
                                      std::uint64_t seed);

// Chinese-restaurant sampler with mass beta (the sigma -> 0 limit family)
PartitionSample dp_sample_partition(std::uint64_t m, double beta, std::uint64_t seed);

}  // namespace cmsn
