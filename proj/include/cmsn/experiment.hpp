#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cmsn/streams.hpp"

namespace cmsn {

struct EstimatorSet {
    bool cms = true;
    bool cmm = true;
    bool dp = true;
    bool nigp = true;

    bool any_bayesian() const { return dp || nigp; }
};

struct ExperimentConfig {
    StreamSpec stream;
    std::uint64_t sketch_seed = 1;
    std::uint32_t depth = 4;
    std::uint32_t width = 160;
    EstimatorSet estimators;
    // upper edges of the half-open true-frequency bins (0,b1],(b1,b2],...;
    // anything beyond the last edge lands in an extra open-ended bin
    std::vector<std::uint64_t> bin_edges{1, 2, 4, 8, 16, 32, 64, 128, 256};
    std::uint64_t eval_sample_per_bin = 0;  // 0 = evaluate every distinct token
    std::uint64_t eval_seed = 1;
    std::string output_path;  // empty = stdout only
    std::size_t threads = 0;  // 0 = hardware concurrency

    void validate() const;  // throws ConfigError
};

// flat key/value config file; '#' starts a comment
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_line(ExperimentConfig& cfg, const std::string& key, const std::string& value);

struct MaeCell {
    double mae = 0.0;
    std::uint64_t count = 0;
};

struct MaeReport {
    std::vector<std::string> bin_labels;
    std::vector<std::string> estimator_names;
    std::vector<std::vector<MaeCell>> cells;  // [bin][estimator]
    std::optional<double> alpha_nigp;
    std::optional<double> alpha_dp;
    std::uint64_t evaluated_tokens = 0;
    double wall_seconds = 0.0;
    std::vector<std::pair<std::string, std::string>> config_echo;

    const MaeCell& at(const std::string& bin, const std::string& estimator) const;
};

MaeReport run_experiment(const ExperimentConfig& config);

// machine output; deterministic for fixed config and seeds (no timings)
void write_csv(const MaeReport& report, std::ostream& out);
// aligned human-readable table, includes wall time
void write_markdown(const MaeReport& report, std::ostream& out);

struct PowerlawDiagnostics {
    // (repeat, m, K_m) at log-spaced checkpoints
    std::vector<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>> growth;
    // (repeat, r, M_r / K) multiplicity profile
    std::vector<std::tuple<std::uint64_t, std::uint64_t, double>> profile;
};

// sigma = 0 runs the Chinese-restaurant path with mass alpha/2 (the limit
// family); grid_size checkpoints per repeat
PowerlawDiagnostics diagnostics_powerlaw(double sigma, double alpha, std::uint64_t m,
                                         std::uint64_t repeats, std::uint64_t seed = 1,
                                         std::size_t grid_size = 20);
void write_csv(const PowerlawDiagnostics& diag, std::ostream& out);

}  // namespace cmsn
