#include "cmsn/streams.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cmsn/errors.hpp"
#include "cmsn/posterior.hpp"

namespace cmsn {

ZipfStream::ZipfStream(double s, std::uint64_t seed) : s_(s), rng_(seed) {
    if (!(s > 1.0)) throw std::invalid_argument("ZipfStream: requires s > 1");
    b_ = std::pow(2.0, s - 1.0);
}

std::uint64_t ZipfStream::next_rank() {
    // rejection sampler for the zeta distribution (Devroye, ch. X.6)
    for (;;) {
        double u = rng_.uniform01_pos();
        double v = rng_.uniform01();
        double xd = std::floor(std::pow(u, -1.0 / (s_ - 1.0)));
        if (xd < 1.0 || xd >= 9.2e18) continue;
        double t = std::pow(1.0 + 1.0 / xd, s_ - 1.0);
        if (v * xd * (t - 1.0) / (b_ - 1.0) <= t / b_)
            return static_cast<std::uint64_t>(xd);
    }
}

void for_each_token(const std::string& path, TextFormat format,
                    const std::function<void(std::string_view)>& sink) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open input file: " + path);

    if (format == TextFormat::Plain) {
        std::string word;
        char ch;
        while (in.get(ch)) {
            if (std::isalnum(static_cast<unsigned char>(ch))) {
                word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
            } else if (!word.empty()) {
                sink(word);
                word.clear();
            }
        }
        if (!word.empty()) sink(word);
        return;
    }

    // UCI bag-of-words: three header lines D, W, NNZ then "docID wordID count"
    std::string line;
    std::uint64_t header[3];
    for (int i = 0; i < 3; ++i) {
        if (!std::getline(in, line))
            throw FormatError(path + ": truncated bag-of-words header at line "
                              + std::to_string(i + 1));
        std::istringstream ls(line);
        if (!(ls >> header[i]))
            throw FormatError(path + ": malformed bag-of-words header at line "
                              + std::to_string(i + 1));
    }
    std::uint64_t line_no = 3;
    std::string token;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::uint64_t doc, word, count;
        if (!(ls >> doc >> word >> count))
            throw FormatError(path + ": malformed triple at line " + std::to_string(line_no));
        token = std::to_string(word);
        for (std::uint64_t i = 0; i < count; ++i) sink(token);
    }
}

void ExactCounter::add(std::string_view token) {
    ++counts_[std::string(token)];
    ++total_;
}

std::uint64_t ExactCounter::count(const std::string& token) const {
    auto it = counts_.find(token);
    return it == counts_.end() ? 0 : it->second;
}

void PartitionStats::validate() const {
    std::uint64_t sum_mult = 0, sum_weighted = 0;
    for (std::size_t r = 0; r < multiplicities.size(); ++r) {
        sum_mult += multiplicities[r];
        sum_weighted += multiplicities[r] * (r + 1);
    }
    if (sum_mult != k || sum_weighted != m)
        throw NumericError("PartitionStats: multiplicity identities violated");
}

namespace {

PartitionSample finish_sample(std::uint64_t m, std::vector<std::uint64_t> block_sizes,
                              std::vector<std::uint64_t> k_traj) {
    PartitionSample out;
    out.stats.m = m;
    out.stats.k = block_sizes.size();
    out.stats.multiplicities.assign(m, 0);
    for (std::uint64_t n : block_sizes) ++out.stats.multiplicities[n - 1];
    out.block_sizes = std::move(block_sizes);
    out.k_trajectory = std::move(k_traj);
    out.stats.validate();
    return out;
}

}  // namespace

PartitionSample nggp_sample_partition(std::uint64_t m, double alpha, double sigma,
                                      std::uint64_t seed) {
    if (!(sigma > 0.0 && sigma < 1.0))
        throw std::invalid_argument("nggp_sample_partition: sigma outside (0,1)");
    if (!(alpha > 0.0)) throw std::invalid_argument("nggp_sample_partition: alpha <= 0");
    if (m == 0 || m > 100000)
        throw std::invalid_argument("nggp_sample_partition: m outside [1, 1e5]");

    Rng rng(seed);
    VTable vt(alpha, sigma);
    std::vector<std::uint64_t> sizes{1};
    std::vector<std::uint64_t> k_traj{1};
    k_traj.reserve(m);

    for (std::uint64_t i = 1; i < m; ++i) {
        const std::uint64_t k = sizes.size();
        const double lv = vt(i, k);
        const double p_new = std::exp(vt(i + 1, k + 1) - lv);
        const double w_old = static_cast<double>(i) - static_cast<double>(k) * sigma;
        const double p_old = std::exp(vt(i + 1, k) - lv) * w_old;
        if (std::abs(p_new + p_old - 1.0) > 1e-8)
            throw NumericError("nggp_sample_partition: predictive mass "
                               + std::to_string(p_new + p_old) + " != 1");
        double u = rng.uniform01() * (p_new + p_old);
        if (u < p_new) {
            sizes.push_back(1);
        } else {
            // pick an existing block with weight n_i - sigma
            double target = (u - p_new) / std::exp(vt(i + 1, k) - lv);
            std::size_t j = 0;
            for (; j + 1 < sizes.size(); ++j) {
                double w = static_cast<double>(sizes[j]) - sigma;
                if (target < w) break;
                target -= w;
            }
            ++sizes[j];
        }
        k_traj.push_back(sizes.size());
    }
    return finish_sample(m, std::move(sizes), std::move(k_traj));
}

PartitionSample dp_sample_partition(std::uint64_t m, double beta, std::uint64_t seed) {
    if (!(beta > 0.0)) throw std::invalid_argument("dp_sample_partition: beta <= 0");
    if (m == 0) throw std::invalid_argument("dp_sample_partition: m == 0");

    Rng rng(seed);
    std::vector<std::uint64_t> sizes{1};
    std::vector<std::uint64_t> k_traj{1};
    k_traj.reserve(m);
    for (std::uint64_t i = 1; i < m; ++i) {
        double u = rng.uniform01() * (beta + static_cast<double>(i));
        if (u < beta) {
            sizes.push_back(1);
        } else {
            double target = u - beta;
            std::size_t j = 0;
            for (; j + 1 < sizes.size(); ++j) {
                double w = static_cast<double>(sizes[j]);
                if (target < w) break;
                target -= w;
            }
            ++sizes[j];
        }
        k_traj.push_back(sizes.size());
    }
    return finish_sample(m, std::move(sizes), std::move(k_traj));
}

}  // namespace cmsn
