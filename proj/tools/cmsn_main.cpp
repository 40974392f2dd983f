// cmsn: count-min sketching with Bayesian frequency posteriors.
//
// Subcommands:
//   experiment run    build a sketch from a stream, calibrate, score estimators
//   sketch build      ingest a text file and persist the sketch
//   sketch query      point queries against a persisted sketch (tokens on stdin)
//   diagnose powerlaw partition-growth diagnostics for the prior family

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cmsn/errors.hpp"
#include "cmsn/experiment.hpp"
#include "cmsn/likelihood.hpp"
#include "cmsn/posterior.hpp"
#include "cmsn/sketch.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

int cmd_experiment_run(const std::string& config_path,
                       const std::vector<std::string>& overrides, std::uint64_t repeats) {
    cmsn::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = cmsn::parse_config_file(config_path);
    for (const std::string& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw cmsn::ConfigError("override must be key=value: " + kv);
        cmsn::apply_config_line(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (repeats <= 1) {
        cmsn::MaeReport report = cmsn::run_experiment(cfg);
        if (!cfg.output_path.empty()) {
            std::ofstream out(cfg.output_path);
            if (!out) throw cmsn::ConfigError("cannot open output: " + cfg.output_path);
            cmsn::write_csv(report, out);
        }
        cmsn::write_markdown(report, std::cout);
        return kExitOk;
    }

    // repeated runs vary the hash seed; cells report mean +- sd
    std::vector<cmsn::MaeReport> reports;
    for (std::uint64_t r = 0; r < repeats; ++r) {
        cmsn::ExperimentConfig run_cfg = cfg;
        run_cfg.sketch_seed = cfg.sketch_seed + r;
        reports.push_back(cmsn::run_experiment(run_cfg));
    }
    const cmsn::MaeReport& first = reports.front();
    std::ostream* outp = &std::cout;
    std::ofstream file;
    if (!cfg.output_path.empty()) {
        file.open(cfg.output_path);
        if (!file) throw cmsn::ConfigError("cannot open output: " + cfg.output_path);
        outp = &file;
    }
    *outp << "bin,estimator,mae_mean,mae_sd,count\n";
    for (std::size_t b = 0; b < first.bin_labels.size(); ++b) {
        for (std::size_t e = 0; e < first.estimator_names.size(); ++e) {
            double mean = 0.0, sq = 0.0;
            for (const auto& rep : reports) {
                mean += rep.cells[b][e].mae;
                sq += rep.cells[b][e].mae * rep.cells[b][e].mae;
            }
            mean /= static_cast<double>(repeats);
            double sd = std::sqrt(std::max(0.0, sq / static_cast<double>(repeats) - mean * mean));
            *outp << "\"" << first.bin_labels[b] << "\"," << first.estimator_names[e] << ","
                  << mean << "," << sd << "," << first.cells[b][e].count << "\n";
        }
    }
    if (outp == &file) std::cout << "report written to " << cfg.output_path << "\n";
    return kExitOk;
}

int cmd_sketch_build(std::uint64_t seed, std::uint32_t depth, std::uint32_t width,
                     const std::string& input, const std::string& format,
                     const std::string& output, bool calibrate) {
    cmsn::TextFormat fmt;
    if (format == "plain")
        fmt = cmsn::TextFormat::Plain;
    else if (format == "uci_bagofwords")
        fmt = cmsn::TextFormat::UciBagOfWords;
    else
        throw cmsn::ConfigError("unknown --format: " + format);

    cmsn::Sketch sketch(seed, depth, width);
    cmsn::for_each_token(input, fmt, [&](std::string_view tok) { sketch.update(tok); });
    sketch.save(output);
    std::cout << "sketch written to " << output << " (m=" << sketch.total() << ")\n";
    if (calibrate) {
        cmsn::AlphaEstimate est = cmsn::estimate_alpha(sketch);
        std::ofstream side(output + ".alpha");
        side.precision(12);
        side << est.alpha_hat << "\n";
        std::cout << "calibrated alpha_hat=" << est.alpha_hat << " stored in " << output
                  << ".alpha\n";
    }
    return kExitOk;
}

int cmd_sketch_query(const std::string& sketch_path, std::optional<double> alpha) {
    cmsn::Sketch sketch = cmsn::Sketch::load(sketch_path);
    if (!alpha) {
        std::ifstream side(sketch_path + ".alpha");
        double v;
        if (side >> v) alpha = v;
    }
    if (!alpha) {
        std::cerr << "no --alpha given and no stored calibration; estimating from the sketch\n";
        alpha = cmsn::estimate_alpha(sketch).alpha_hat;
        std::cerr << "alpha_hat=" << *alpha << "\n";
    }
    cmsn::NigpQueryEngine engine({*alpha, sketch.width()});

    std::cout << "token\tcms\tcmm\tnigp_mean\tnigp_median\tnigp_mode\tci95_lo\tci95_hi\n";
    std::string token;
    while (std::cin >> token) {
        cmsn::BucketVector bv = sketch.bucket_vector(token);
        std::uint64_t cms = cmsn::estimate_cms(bv);
        double cmm = cmsn::estimate_cmm(bv, sketch.total(), sketch.width());
        cmsn::PosteriorPmf pmf = engine.sketch_posterior(bv);
        auto [lo, hi] = cmsn::credible_interval(pmf, 0.95);
        std::cout << token << "\t" << cms << "\t" << cmm << "\t" << cmsn::posterior_mean(pmf)
                  << "\t" << cmsn::posterior_median(pmf) << "\t" << cmsn::posterior_mode(pmf)
                  << "\t" << lo << "\t" << hi << "\n";
    }
    return kExitOk;
}

int cmd_diagnose_powerlaw(double sigma, double alpha, std::uint64_t m, std::uint64_t repeats,
                          std::uint64_t seed, std::size_t grid, const std::string& output) {
    cmsn::PowerlawDiagnostics diag =
        cmsn::diagnostics_powerlaw(sigma, alpha, m, repeats, seed, grid);
    if (!output.empty()) {
        std::ofstream out(output);
        if (!out) throw cmsn::ConfigError("cannot open output: " + output);
        cmsn::write_csv(diag, out);
        std::cout << "diagnostics written to " << output << "\n";
    } else {
        cmsn::write_csv(diag, std::cout);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"count-min sketch with power-law Bayesian point queries"};
    app.require_subcommand(1);

    // experiment run
    auto* experiment = app.add_subcommand("experiment", "batch MAE experiments");
    experiment->require_subcommand(1);
    auto* run = experiment->add_subcommand("run", "run an experiment from a config");
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t repeats = 1;
    run->add_option("--config", config_path, "flat key=value config file");
    run->add_option("--set", overrides, "override config entries, key=value");
    run->add_option("--repeats", repeats, "rerun with hash seeds seed..seed+R-1, report mean +- sd");

    // sketch build / query
    auto* sketch = app.add_subcommand("sketch", "build and query persisted sketches");
    sketch->require_subcommand(1);
    auto* build = sketch->add_subcommand("build", "ingest a file and write a sketch");
    std::uint64_t b_seed = 1;
    std::uint32_t b_depth = 4, b_width = 160;
    std::string b_input, b_format = "plain", b_output = "sketch.cmsn";
    bool b_calibrate = false;
    build->add_option("--seed", b_seed, "hash family seed");
    build->add_option("--depth", b_depth, "number of rows N");
    build->add_option("--width", b_width, "buckets per row J");
    build->add_option("--input", b_input, "input file")->required();
    build->add_option("--format", b_format, "plain | uci_bagofwords");
    build->add_option("--output", b_output, "sketch file to write");
    build->add_flag("--calibrate", b_calibrate, "store alpha_hat next to the sketch");

    auto* query = sketch->add_subcommand("query", "estimate frequencies for stdin tokens");
    std::string q_sketch;
    double q_alpha = -1.0;
    query->add_option("--sketch", q_sketch, "sketch file")->required();
    query->add_option("--alpha", q_alpha, "prior mass (default: stored or estimated)");

    // diagnose powerlaw
    auto* diagnose = app.add_subcommand("diagnose", "sampler diagnostics");
    diagnose->require_subcommand(1);
    auto* powerlaw = diagnose->add_subcommand("powerlaw", "partition growth and multiplicities");
    double d_sigma = 0.5, d_alpha = 1.0;
    std::uint64_t d_m = 10000, d_repeats = 1, d_seed = 1;
    std::size_t d_grid = 20;
    std::string d_output;
    powerlaw->add_option("--sigma", d_sigma, "stability index in [0,1); 0 = limit family");
    powerlaw->add_option("--alpha", d_alpha, "mass parameter");
    powerlaw->add_option("--m", d_m, "sample size");
    powerlaw->add_option("--repeats", d_repeats, "independent runs");
    powerlaw->add_option("--seed", d_seed, "base seed");
    powerlaw->add_option("--grid", d_grid, "growth checkpoints per run");
    powerlaw->add_option("--output", d_output, "write CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_experiment_run(config_path, overrides, repeats);
        if (build->parsed())
            return cmd_sketch_build(b_seed, b_depth, b_width, b_input, b_format, b_output,
                                    b_calibrate);
        if (query->parsed())
            return cmd_sketch_query(q_sketch,
                                    q_alpha > 0 ? std::optional<double>(q_alpha) : std::nullopt);
        if (powerlaw->parsed())
            return cmd_diagnose_powerlaw(d_sigma, d_alpha, d_m, d_repeats, d_seed, d_grid,
                                         d_output);
    } catch (const cmsn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const cmsn::FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const cmsn::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
