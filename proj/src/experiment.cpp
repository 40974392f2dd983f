#include "cmsn/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "cmsn/errors.hpp"
#include "cmsn/likelihood.hpp"
#include "cmsn/posterior.hpp"
#include "cmsn/sketch.hpp"

namespace cmsn {

namespace {

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(1, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            try {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= count) return;
                    body(i);
                }
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

std::string bin_label(std::uint64_t lo, std::uint64_t hi) {
    return "(" + std::to_string(lo) + "," + std::to_string(hi) + "]";
}

std::vector<std::string> make_bin_labels(const std::vector<std::uint64_t>& edges) {
    std::vector<std::string> labels;
    std::uint64_t lo = 0;
    for (std::uint64_t e : edges) {
        labels.push_back(bin_label(lo, e));
        lo = e;
    }
    labels.push_back(">" + std::to_string(lo));
    return labels;
}

std::size_t bin_of(std::uint64_t truth, const std::vector<std::uint64_t>& edges) {
    for (std::size_t b = 0; b < edges.size(); ++b)
        if (truth <= edges[b]) return b;
    return edges.size();
}

struct TokenEval {
    std::uint64_t truth;
    double err_cms, err_cmm, err_dp, err_nigp;
};

void ingest(const ExperimentConfig& cfg, Sketch& sketch, ExactCounter& exact) {
    const StreamSpec& sp = cfg.stream;
    auto feed = [&](std::string_view token) {
        sketch.update(token);
        exact.add(token);
    };
    switch (sp.kind) {
        case StreamKind::Zipf: {
            if (sp.length == 0) throw ConfigError("stream.m must be positive");
            ZipfStream zipf(sp.s, sp.seed);
            for (std::uint64_t i = 0; i < sp.length; ++i) feed(zipf.next_token());
            break;
        }
        case StreamKind::TextFile:
            for_each_token(sp.path, TextFormat::Plain, feed);
            break;
        case StreamKind::BagOfWordsFile:
            for_each_token(sp.path, TextFormat::UciBagOfWords, feed);
            break;
        case StreamKind::Nggp: {
            auto sample = nggp_sample_partition(sp.length, sp.alpha, sp.sigma, sp.seed);
            for (std::size_t b = 0; b < sample.block_sizes.size(); ++b) {
                std::string token = std::to_string(b + 1);
                for (std::uint64_t i = 0; i < sample.block_sizes[b]; ++i) feed(token);
            }
            break;
        }
        case StreamKind::Dp: {
            auto sample = dp_sample_partition(sp.length, sp.beta, sp.seed);
            for (std::size_t b = 0; b < sample.block_sizes.size(); ++b) {
                std::string token = std::to_string(b + 1);
                for (std::uint64_t i = 0; i < sample.block_sizes[b]; ++i) feed(token);
            }
            break;
        }
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    if (depth == 0 || width == 0) throw ConfigError("sketch depth and width must be >= 1");
    if (bin_edges.empty()) throw ConfigError("at least one bin edge required");
    for (std::size_t i = 1; i < bin_edges.size(); ++i)
        if (bin_edges[i] <= bin_edges[i - 1])
            throw ConfigError("bin edges must be strictly increasing");
    switch (stream.kind) {
        case StreamKind::Zipf:
            if (!(stream.s > 1.0)) throw ConfigError("zipf stream requires s > 1");
            if (stream.length == 0) throw ConfigError("stream.m must be positive");
            break;
        case StreamKind::Nggp:
            if (!(stream.sigma > 0.0 && stream.sigma < 1.0))
                throw ConfigError("nggp stream requires sigma in (0,1)");
            if (!(stream.alpha > 0.0)) throw ConfigError("nggp stream requires alpha > 0");
            if (stream.length == 0) throw ConfigError("stream.m must be positive");
            break;
        case StreamKind::Dp:
            if (!(stream.beta > 0.0)) throw ConfigError("dp stream requires beta > 0");
            if (stream.length == 0) throw ConfigError("stream.m must be positive");
            break;
        case StreamKind::TextFile:
        case StreamKind::BagOfWordsFile:
            if (stream.path.empty()) throw ConfigError("text stream requires a path");
            break;
    }
    if (!estimators.cms && !estimators.cmm && !estimators.dp && !estimators.nigp)
        throw ConfigError("no estimators enabled");
}

void apply_config_line(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    auto as_u64 = [&](const std::string& v) -> std::uint64_t {
        try {
            return std::stoull(v);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': bad integer '" + v + "'");
        }
    };
    auto as_f64 = [&](const std::string& v) -> double {
        try {
            return std::stod(v);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': bad number '" + v + "'");
        }
    };

    if (key == "stream.kind") {
        if (value == "zipf") cfg.stream.kind = StreamKind::Zipf;
        else if (value == "text") cfg.stream.kind = StreamKind::TextFile;
        else if (value == "bagofwords") cfg.stream.kind = StreamKind::BagOfWordsFile;
        else if (value == "nggp") cfg.stream.kind = StreamKind::Nggp;
        else if (value == "dp") cfg.stream.kind = StreamKind::Dp;
        else throw ConfigError("unknown stream.kind: " + value);
    } else if (key == "stream.s") {
        cfg.stream.s = as_f64(value);
    } else if (key == "stream.sigma") {
        cfg.stream.sigma = as_f64(value);
    } else if (key == "stream.alpha") {
        cfg.stream.alpha = as_f64(value);
    } else if (key == "stream.beta") {
        cfg.stream.beta = as_f64(value);
    } else if (key == "stream.m") {
        cfg.stream.length = as_u64(value);
    } else if (key == "stream.seed") {
        cfg.stream.seed = as_u64(value);
    } else if (key == "stream.path") {
        cfg.stream.path = value;
    } else if (key == "sketch.seed") {
        cfg.sketch_seed = as_u64(value);
    } else if (key == "sketch.depth") {
        cfg.depth = static_cast<std::uint32_t>(as_u64(value));
    } else if (key == "sketch.width") {
        cfg.width = static_cast<std::uint32_t>(as_u64(value));
    } else if (key == "estimators") {
        cfg.estimators = {false, false, false, false};
        std::istringstream ss(value);
        std::string name;
        while (std::getline(ss, name, ',')) {
            if (name == "cms") cfg.estimators.cms = true;
            else if (name == "cmm") cfg.estimators.cmm = true;
            else if (name == "dp") cfg.estimators.dp = true;
            else if (name == "nigp") cfg.estimators.nigp = true;
            else throw ConfigError("unknown estimator: " + name);
        }
    } else if (key == "bins") {
        cfg.bin_edges.clear();
        std::istringstream ss(value);
        std::string edge;
        while (std::getline(ss, edge, ',')) cfg.bin_edges.push_back(as_u64(edge));
    } else if (key == "eval_sample_per_bin") {
        cfg.eval_sample_per_bin = as_u64(value);
    } else if (key == "eval_seed") {
        cfg.eval_seed = as_u64(value);
    } else if (key == "output") {
        cfg.output_path = value;
    } else if (key == "threads") {
        cfg.threads = static_cast<std::size_t>(as_u64(value));
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ExperimentConfig cfg;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto strip = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string stripped = strip(line);
        if (stripped.empty()) continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ": line " + std::to_string(line_no) + " is not key = value");
        apply_config_line(cfg, strip(stripped.substr(0, eq)), strip(stripped.substr(eq + 1)));
    }
    return cfg;
}

const MaeCell& MaeReport::at(const std::string& bin, const std::string& estimator) const {
    for (std::size_t b = 0; b < bin_labels.size(); ++b) {
        if (bin_labels[b] != bin) continue;
        for (std::size_t e = 0; e < estimator_names.size(); ++e)
            if (estimator_names[e] == estimator) return cells[b][e];
    }
    throw std::out_of_range("MaeReport::at: no cell " + bin + "/" + estimator);
}

MaeReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();

    Sketch sketch(config.sketch_seed, config.depth, config.width);
    ExactCounter exact;
    ingest(config, sketch, exact);

    MaeReport report;
    report.bin_labels = make_bin_labels(config.bin_edges);

    // calibration happens only when a Bayesian estimator asks for it, and
    // sees nothing but the sketch
    std::optional<NigpModel> nigp_model;
    std::optional<double> dp_beta;
    if (config.estimators.nigp) {
        AlphaEstimate est = estimate_alpha(sketch);
        report.alpha_nigp = est.alpha_hat;
        nigp_model = NigpModel{est.alpha_hat, config.width};
    }
    if (config.estimators.dp) {
        AlphaEstimate est = estimate_alpha_dp(sketch);
        report.alpha_dp = est.alpha_hat;
        dp_beta = est.alpha_hat / config.width;
    }

    // deterministic evaluation order: sorted distinct tokens
    std::vector<const std::string*> tokens;
    tokens.reserve(exact.distinct());
    for (const auto& [token, count] : exact.counts()) tokens.push_back(&token);
    std::sort(tokens.begin(), tokens.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });

    // optional per-bin subsample, seeded
    if (config.eval_sample_per_bin > 0) {
        std::vector<std::vector<const std::string*>> per_bin(config.bin_edges.size() + 1);
        for (const std::string* tok : tokens)
            per_bin[bin_of(exact.count(*tok), config.bin_edges)].push_back(tok);
        Rng rng(config.eval_seed);
        std::vector<const std::string*> chosen;
        for (auto& bucket : per_bin) {
            // partial Fisher-Yates
            std::uint64_t take = std::min<std::uint64_t>(config.eval_sample_per_bin, bucket.size());
            for (std::uint64_t i = 0; i < take; ++i) {
                std::uint64_t j = i + rng.uniform_below(bucket.size() - i);
                std::swap(bucket[i], bucket[j]);
                chosen.push_back(bucket[i]);
            }
        }
        std::sort(chosen.begin(), chosen.end(),
                  [](const std::string* a, const std::string* b) { return *a < *b; });
        tokens = std::move(chosen);
    }

    std::optional<NigpQueryEngine> nigp_engine;
    if (nigp_model) nigp_engine.emplace(*nigp_model);
    std::optional<DpQueryEngine> dp_engine;
    if (dp_beta) dp_engine.emplace(*dp_beta);

    // warm the per-count posterior tables in parallel before the token sweep
    if (nigp_engine || dp_engine) {
        std::vector<std::uint64_t> uniq;
        for (const std::string* tok : tokens) {
            BucketVector bv = sketch.bucket_vector(*tok);
            uniq.insert(uniq.end(), bv.begin(), bv.end());
        }
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        parallel_for(uniq.size(), config.threads, [&](std::size_t i) {
            if (nigp_engine) nigp_engine->row_table(uniq[i]);
            if (dp_engine) dp_engine->row_table(uniq[i]);
        });
    }

    std::vector<TokenEval> evals(tokens.size());
    parallel_for(tokens.size(), config.threads, [&](std::size_t i) {
        const std::string& token = *tokens[i];
        const std::uint64_t truth = exact.count(token);
        BucketVector bv = sketch.bucket_vector(token);
        TokenEval ev{};
        ev.truth = truth;
        const double truth_d = static_cast<double>(truth);
        if (config.estimators.cms)
            ev.err_cms = std::abs(static_cast<double>(estimate_cms(bv)) - truth_d);
        if (config.estimators.cmm)
            ev.err_cmm = std::abs(estimate_cmm(bv, sketch.total(), config.width) - truth_d);
        if (config.estimators.dp)
            ev.err_dp = std::abs(posterior_mean(dp_engine->sketch_posterior(bv)) - truth_d);
        if (config.estimators.nigp) {
            PosteriorPmf pmf = nigp_engine->sketch_posterior(bv);
            double mean = posterior_mean(pmf);
            if (mean > static_cast<double>(estimate_cms(bv)) + 1e-9)
                throw NumericError("bounded-support violation: posterior mean above row minimum");
            ev.err_nigp = std::abs(mean - truth_d);
        }
        evals[i] = ev;
    });

    // fixed-order reduction
    const std::size_t n_bins = config.bin_edges.size() + 1;
    struct Acc {
        double sum = 0;
        std::uint64_t n = 0;
    };
    std::vector<std::array<Acc, 4>> acc(n_bins);
    for (const TokenEval& ev : evals) {
        std::size_t b = bin_of(ev.truth, config.bin_edges);
        acc[b][0].sum += ev.err_cms;
        acc[b][1].sum += ev.err_cmm;
        acc[b][2].sum += ev.err_dp;
        acc[b][3].sum += ev.err_nigp;
        for (auto& a : acc[b]) ++a.n;
    }

    const bool enabled[4] = {config.estimators.cms, config.estimators.cmm, config.estimators.dp,
                             config.estimators.nigp};
    const char* names[4] = {"cms", "cmm", "dp", "nigp"};
    for (int e = 0; e < 4; ++e)
        if (enabled[e]) report.estimator_names.push_back(names[e]);
    report.cells.assign(n_bins, {});
    for (std::size_t b = 0; b < n_bins; ++b) {
        for (int e = 0; e < 4; ++e) {
            if (!enabled[e]) continue;
            MaeCell cell;
            cell.count = acc[b][e].n;
            cell.mae = acc[b][e].n ? acc[b][e].sum / acc[b][e].n : 0.0;
            report.cells[b].push_back(cell);
        }
    }
    report.evaluated_tokens = tokens.size();

    report.config_echo = {
        {"sketch.seed", std::to_string(config.sketch_seed)},
        {"sketch.depth", std::to_string(config.depth)},
        {"sketch.width", std::to_string(config.width)},
        {"stream.seed", std::to_string(config.stream.seed)},
        {"tokens.total", std::to_string(sketch.total())},
        {"tokens.distinct", std::to_string(exact.distinct())},
    };
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

void write_csv(const MaeReport& report, std::ostream& out) {
    out << "# cmsn experiment report\n";
    for (const auto& [k, v] : report.config_echo) out << "# " << k << "," << v << "\n";
    if (report.alpha_nigp)
        out << "# alpha.nigp," << std::setprecision(10) << *report.alpha_nigp << "\n";
    if (report.alpha_dp) out << "# alpha.dp," << std::setprecision(10) << *report.alpha_dp << "\n";
    out << "bin,estimator,mae,count\n";
    out << std::fixed << std::setprecision(6);
    for (std::size_t b = 0; b < report.bin_labels.size(); ++b)
        for (std::size_t e = 0; e < report.estimator_names.size(); ++e)
            out << "\"" << report.bin_labels[b] << "\"," << report.estimator_names[e] << ","
                << report.cells[b][e].mae << "," << report.cells[b][e].count << "\n";
    out.unsetf(std::ios::fixed);
    out << std::setprecision(6);
}

void write_markdown(const MaeReport& report, std::ostream& out) {
    out << "| bin | tokens |";
    for (const auto& name : report.estimator_names) out << " " << name << " |";
    out << "\n|---|---|";
    for (std::size_t e = 0; e < report.estimator_names.size(); ++e) out << "---|";
    out << "\n";
    out << std::fixed << std::setprecision(2);
    for (std::size_t b = 0; b < report.bin_labels.size(); ++b) {
        out << "| " << report.bin_labels[b] << " | " << report.cells[b][0].count << " |";
        for (std::size_t e = 0; e < report.estimator_names.size(); ++e)
            out << " " << report.cells[b][e].mae << " |";
        out << "\n";
    }
    out.unsetf(std::ios::fixed);
    out << std::setprecision(6);
    if (report.alpha_nigp) out << "\nalpha_hat (nigp): " << *report.alpha_nigp << "\n";
    if (report.alpha_dp) out << "alpha_hat (dp): " << *report.alpha_dp << "\n";
    out << "evaluated tokens: " << report.evaluated_tokens << "\n";
    out << "wall time: " << std::setprecision(1) << std::fixed << report.wall_seconds << " s\n";
    out.unsetf(std::ios::fixed);
    out << std::setprecision(6);
}

PowerlawDiagnostics diagnostics_powerlaw(double sigma, double alpha, std::uint64_t m,
                                         std::uint64_t repeats, std::uint64_t seed,
                                         std::size_t grid_size) {
    if (sigma < 0.0 || sigma >= 1.0)
        throw ConfigError("diagnostics_powerlaw: sigma must lie in [0,1)");
    if (m < 2 || repeats == 0 || grid_size < 2)
        throw ConfigError("diagnostics_powerlaw: need m >= 2, repeats >= 1, grid >= 2");

    // log-spaced checkpoints from 10 (or 2) up to m
    std::vector<std::uint64_t> checkpoints;
    const double lo = std::log(std::min<std::uint64_t>(10, m));
    const double hi = std::log(static_cast<double>(m));
    for (std::size_t i = 0; i < grid_size; ++i) {
        double x = std::exp(lo + (hi - lo) * static_cast<double>(i) / (grid_size - 1));
        std::uint64_t cp = std::max<std::uint64_t>(2, static_cast<std::uint64_t>(std::llround(x)));
        checkpoints.push_back(std::min(cp, m));
    }

    PowerlawDiagnostics diag;
    for (std::uint64_t rep = 0; rep < repeats; ++rep) {
        PartitionSample sample = (sigma == 0.0)
                                     ? dp_sample_partition(m, alpha / 2.0, seed + rep)
                                     : nggp_sample_partition(m, alpha, sigma, seed + rep);
        for (std::uint64_t cp : checkpoints)
            diag.growth.emplace_back(rep, cp, sample.k_trajectory[cp - 1]);
        const double k = static_cast<double>(sample.stats.k);
        const std::uint64_t rmax = std::min<std::uint64_t>(100, sample.stats.multiplicities.size());
        for (std::uint64_t r = 1; r <= rmax; ++r)
            diag.profile.emplace_back(rep, r,
                                      static_cast<double>(sample.stats.multiplicities[r - 1]) / k);
    }
    return diag;
}

void write_csv(const PowerlawDiagnostics& diag, std::ostream& out) {
    out << "series,repeat,x,value\n";
    for (const auto& [rep, mm, k] : diag.growth)
        out << "K," << rep << "," << mm << "," << k << "\n";
    out << std::setprecision(8);
    for (const auto& [rep, r, frac] : diag.profile)
        out << "M," << rep << "," << r << "," << frac << "\n";
}

}  // namespace cmsn
