#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gfsc/data.hpp"
#include "gfsc/errors.hpp"
#include "gfsc/graph.hpp"
#include "gfsc/matrix.hpp"
#include "gfsc/metrics.hpp"
#include "gfsc/selfexpress.hpp"
#include "gfsc/spectral.hpp"

namespace gfsc {

enum class Algorithm { lsr, trr, flsr, ftrr };

inline const char* algorithm_name(Algorithm algo) {
    switch (algo) {
        case Algorithm::lsr: return "lsr";
        case Algorithm::trr: return "trr";
        case Algorithm::flsr: return "flsr";
        case Algorithm::ftrr: return "ftrr";
    }
    return "?";
}

inline Algorithm parse_algorithm(const std::string& name) {
    if (name == "lsr") return Algorithm::lsr;
    if (name == "trr") return Algorithm::trr;
    if (name == "flsr") return Algorithm::flsr;
    if (name == "ftrr") return Algorithm::ftrr;
    throw ContractViolation("--algo must be one of lsr, trr, flsr, ftrr (got '" + name + "')");
}

inline bool uses_filter(Algorithm algo) {
    return algo == Algorithm::flsr || algo == Algorithm::ftrr;
}

inline bool uses_threshold(Algorithm algo) {
    return algo == Algorithm::trr || algo == Algorithm::ftrr;
}

struct ExperimentConfig {
    std::string data_path;
    std::string labels_path;      // separate labels file, optional
    bool data_has_labels = false; // final CSV column carries labels
    Algorithm algo = Algorithm::flsr;
    double alpha = -1.0;  // ridge weight, required
    int filter_order = -1; // k, required for flsr/ftrr
    int keep_per_row = -1; // p, required for trr/ftrr
    int clusters = -1;     // g, required
    double epsilon = 1e-5;
    int max_iter = 50;
    std::uint64_t seed = 0;
    int restarts = 20;
    int repeat = 1;
    bool zero_diag = false;
    bool standardize = false;
    bool refilter_previous = false;
    bool trace_metrics = false;
};

// Field checks that do not need the data; messages name the CLI flag.
inline void validate_experiment(const ExperimentConfig& cfg) {
    require(!cfg.data_path.empty(), "--data is required");
    require(!(cfg.data_has_labels && !cfg.labels_path.empty()),
            "--labels and --data-has-labels are mutually exclusive");
    require(cfg.alpha > 0.0, "--alpha must be > 0");
    require(cfg.clusters >= 1, "--g must be >= 1");
    if (uses_filter(cfg.algo))
        require(cfg.filter_order >= 0, "--k must be >= 0 for algorithm '" +
                                           std::string(algorithm_name(cfg.algo)) + "'");
    if (uses_threshold(cfg.algo))
        require(cfg.keep_per_row >= 1, "--p must be >= 1 for algorithm '" +
                                           std::string(algorithm_name(cfg.algo)) + "'");
    require(cfg.epsilon > 0.0, "--epsilon must be > 0");
    require(cfg.max_iter >= 1, "--max-iter must be >= 1");
    require(cfg.restarts >= 1, "--restarts must be >= 1");
    require(cfg.repeat >= 1, "--repeat must be >= 1");
}

struct RunResult {
    Labels labels;
    IterationTrace trace; // empty record list for the single-pass algorithms
    std::optional<double> acc, nmi, pur;
    double solve_seconds = 0.0;
    double cluster_seconds = 0.0;
    double total_seconds = 0.0;

    int iterations() const { return std::max(1, trace.iterations()); }
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0; // population standard deviation
};

struct ClusterReport {
    ExperimentConfig config;
    Eigen::Index n = 0, m = 0;
    bool has_truth = false;
    std::vector<RunResult> runs;
    std::optional<MeanStd> acc_agg, nmi_agg, pur_agg; // repeat > 1 with labels
    double load_seconds = 0.0;
    double total_seconds = 0.0;
};

namespace detail {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline MeanStd mean_std(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

// One affinity solve for the configured algorithm at the given seed, plus the
// optional per-iteration metric snapshots.
inline std::pair<Matrix, IterationTrace> solve_affinity(const ExperimentConfig& cfg,
                                                        const Matrix& x,
                                                        std::uint64_t run_seed,
                                                        const Labels* truth) {
    const LsrConfig lsr{cfg.alpha, cfg.zero_diag};
    if (!uses_filter(cfg.algo)) {
        Matrix z = lsr_coefficients(x, lsr);
        if (uses_threshold(cfg.algo)) z = trr_threshold(z, cfg.keep_per_row);
        IterationTrace trace;
        trace.converged = true;
        return {affinity_from_coefficients(z), std::move(trace)};
    }

    const IterationConfig iteration{cfg.filter_order, cfg.epsilon, cfg.max_iter,
                                    cfg.refilter_previous};
    RunOptions options;
    std::vector<MetricSnapshot> snapshots;
    if (cfg.trace_metrics && truth) {
        options.observer = [&](int, const Matrix&, const Matrix& w_t) {
            const Matrix sym = 0.5 * (w_t + w_t.transpose());
            SeededRng snapshot_rng(run_seed);
            const ClusterAssignment asn = cluster(sym, cfg.clusters, snapshot_rng, cfg.restarts);
            snapshots.push_back({accuracy(asn.labels, *truth), nmi(asn.labels, *truth),
                                 purity(asn.labels, *truth)});
        };
    }

    FixedPointResult result = cfg.algo == Algorithm::ftrr
                                  ? run_ftrr(x, TrrConfig{lsr, cfg.keep_per_row}, iteration, options)
                                  : run_flsr(x, lsr, iteration, options);
    result.trace.snapshots = std::move(snapshots);
    return {std::move(result.affinity), std::move(result.trace)};
}

} // namespace detail

// Loads features (and labels, when configured) for an experiment. Binary
// inputs carry no label column, so labels must come from a separate file.
inline LabeledDataset load_experiment_data(const ExperimentConfig& cfg) {
    LabeledDataset data;
    if (has_smcl_magic(cfg.data_path)) {
        require(!cfg.data_has_labels,
                "--data-has-labels does not apply to binary data; use --labels");
        data.features = read_smcl(cfg.data_path);
        data.name = std::filesystem::path(cfg.data_path).stem().string();
    } else {
        data = load_csv(cfg.data_path, cfg.data_has_labels);
    }
    if (!cfg.labels_path.empty()) {
        const Labels raw = load_labels(cfg.labels_path);
        require(raw.size() == static_cast<std::size_t>(data.features.rows()),
                "--labels row count does not match the data");
        data.labels = canonicalize_labels(raw).labels;
    }
    return data;
}

// Runs the configured algorithm `repeat` times with seeds seed..seed+repeat-1
// on an already loaded dataset.
inline ClusterReport run_experiment(const ExperimentConfig& cfg, const LabeledDataset& data) {
    validate_experiment(cfg);
    const detail::Stopwatch total;
    const Eigen::Index n = data.features.rows();
    require(n >= 2, "--data needs at least 2 samples");
    require(cfg.clusters <= n, "--g exceeds the sample count");
    if (uses_threshold(cfg.algo))
        require(cfg.keep_per_row <= n, "--p exceeds the sample count");
    if (cfg.trace_metrics) {
        require(data.labels.has_value(), "--trace-metrics requires labels");
        require(uses_filter(cfg.algo), "--trace-metrics requires an iterative algorithm");
    }

    const Matrix x = cfg.standardize ? standardized(data.features) : data.features;
    const Labels* truth = data.labels ? &*data.labels : nullptr;

    ClusterReport report;
    report.config = cfg;
    report.n = n;
    report.m = data.features.cols();
    report.has_truth = truth != nullptr;

    for (int r = 0; r < cfg.repeat; ++r) {
        const std::uint64_t run_seed = cfg.seed + static_cast<std::uint64_t>(r);
        const detail::Stopwatch run_timer;
        RunResult run;

        const detail::Stopwatch solve_timer;
        auto [affinity, trace] = detail::solve_affinity(cfg, x, run_seed, truth);
        run.solve_seconds = solve_timer.seconds();
        run.trace = std::move(trace);

        const detail::Stopwatch cluster_timer;
        SeededRng rng(run_seed);
        ClusterAssignment assignment = cluster(affinity, cfg.clusters, rng, cfg.restarts);
        run.cluster_seconds = cluster_timer.seconds();
        run.labels = std::move(assignment.labels);

        if (truth) {
            run.acc = accuracy(run.labels, *truth);
            run.nmi = nmi(run.labels, *truth);
            run.pur = purity(run.labels, *truth);
        }
        run.total_seconds = run_timer.seconds();
        report.runs.push_back(std::move(run));
    }

    if (truth && cfg.repeat > 1) {
        std::vector<double> accs, nmis, purs;
        for (const RunResult& run : report.runs) {
            accs.push_back(*run.acc);
            nmis.push_back(*run.nmi);
            purs.push_back(*run.pur);
        }
        report.acc_agg = detail::mean_std(accs);
        report.nmi_agg = detail::mean_std(nmis);
        report.pur_agg = detail::mean_std(purs);
    }
    report.total_seconds = total.seconds();
    return report;
}

// Loads per the config, then runs.
inline ClusterReport run_experiment(const ExperimentConfig& cfg) {
    validate_experiment(cfg);
    const detail::Stopwatch load_timer;
    const LabeledDataset data = load_experiment_data(cfg);
    const double load_seconds = load_timer.seconds();
    ClusterReport report = run_experiment(cfg, data);
    report.load_seconds = load_seconds;
    report.total_seconds += load_seconds;
    return report;
}

// ---------------------------------------------------------------------------
// Report serialization. The emitted text is line oriented `key = value`; the
// config echo uses the CLI's long option names so the file doubles as a
// --config input. Timing lines live under time.* and are excluded from
// byte-for-byte reproducibility comparisons.

namespace detail {

inline const char* bool_text(bool b) { return b ? "true" : "false"; }

inline void write_run_lines(std::ostream& out, const RunResult& run, const std::string& prefix,
                            bool trace_metrics) {
    out << prefix << "iterations = " << run.iterations() << '\n';
    out << prefix << "converged = " << bool_text(run.trace.converged) << '\n';
    if (run.acc) out << prefix << "acc = " << fmt(*run.acc) << '\n';
    if (run.nmi) out << prefix << "nmi = " << fmt(*run.nmi) << '\n';
    if (run.pur) out << prefix << "pur = " << fmt(*run.pur) << '\n';
    for (std::size_t t = 0; t < run.trace.records.size(); ++t)
        out << prefix << "residual." << (t + 1) << " = "
            << fmt(run.trace.records[t].residual_sq) << '\n';
    if (trace_metrics) {
        for (std::size_t t = 0; t < run.trace.snapshots.size(); ++t) {
            const MetricSnapshot& snap = run.trace.snapshots[t];
            out << prefix << "trace." << (t + 1) << ".acc = " << fmt(snap.acc) << '\n';
            out << prefix << "trace." << (t + 1) << ".nmi = " << fmt(snap.nmi) << '\n';
            out << prefix << "trace." << (t + 1) << ".pur = " << fmt(snap.pur) << '\n';
        }
    }
}

} // namespace detail

inline void write_report(std::ostream& out, const ClusterReport& report) {
    const ExperimentConfig& cfg = report.config;
    out << "format = gfsc-report-v1\n";
    out << "command = cluster\n";
    out << "data = " << cfg.data_path << '\n';
    out << "data-has-labels = " << detail::bool_text(cfg.data_has_labels) << '\n';
    if (!cfg.labels_path.empty()) out << "labels = " << cfg.labels_path << '\n';
    out << "algo = " << algorithm_name(cfg.algo) << '\n';
    out << "alpha = " << detail::fmt(cfg.alpha) << '\n';
    if (uses_filter(cfg.algo)) out << "k = " << cfg.filter_order << '\n';
    if (uses_threshold(cfg.algo)) out << "p = " << cfg.keep_per_row << '\n';
    out << "g = " << cfg.clusters << '\n';
    out << "epsilon = " << detail::fmt(cfg.epsilon) << '\n';
    out << "max-iter = " << cfg.max_iter << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "restarts = " << cfg.restarts << '\n';
    out << "repeat = " << cfg.repeat << '\n';
    out << "zero-diag = " << detail::bool_text(cfg.zero_diag) << '\n';
    out << "standardize = " << detail::bool_text(cfg.standardize) << '\n';
    out << "refilter-previous = " << detail::bool_text(cfg.refilter_previous) << '\n';
    out << "trace-metrics = " << detail::bool_text(cfg.trace_metrics) << '\n';
    out << "result.n = " << report.n << '\n';
    out << "result.m = " << report.m << '\n';

    if (report.runs.size() == 1) {
        detail::write_run_lines(out, report.runs.front(), "result.", cfg.trace_metrics);
    } else {
        for (std::size_t r = 0; r < report.runs.size(); ++r)
            detail::write_run_lines(out, report.runs[r],
                                    "result.run." + std::to_string(r) + ".", cfg.trace_metrics);
        auto aggregate = [&](const char* name, const std::optional<MeanStd>& agg) {
            if (!agg) return;
            out << "result." << name << ".mean = " << detail::fmt(agg->mean) << '\n';
            out << "result." << name << ".std = " << detail::fmt(agg->std) << '\n';
        };
        aggregate("acc", report.acc_agg);
        aggregate("nmi", report.nmi_agg);
        aggregate("pur", report.pur_agg);
    }

    out << "time.load-s = " << detail::fmt(report.load_seconds) << '\n';
    if (report.runs.size() == 1) {
        out << "time.solve-s = " << detail::fmt(report.runs.front().solve_seconds) << '\n';
        out << "time.cluster-s = " << detail::fmt(report.runs.front().cluster_seconds) << '\n';
    } else {
        for (std::size_t r = 0; r < report.runs.size(); ++r) {
            out << "time.run." << r << ".solve-s = "
                << detail::fmt(report.runs[r].solve_seconds) << '\n';
            out << "time.run." << r << ".cluster-s = "
                << detail::fmt(report.runs[r].cluster_seconds) << '\n';
        }
    }
    out << "time.total-s = " << detail::fmt(report.total_seconds) << '\n';
}

inline std::string format_report(const ClusterReport& report) {
    std::ostringstream out;
    write_report(out, report);
    return out.str();
}

// ---------------------------------------------------------------------------
// Parameter sweep: the Cartesian (alpha, k) grid, one row per cell, alpha as
// the outer loop. Cell c runs at seed base+c so a 1x1 grid matches cmd_cluster
// at the base seed exactly. A failing cell records its error category and the
// sweep keeps going.

struct SweepCell {
    double alpha = 0.0;
    int k = 0;
    std::optional<double> acc, nmi, pur;
    std::optional<int> iterations;
    std::optional<bool> converged;
    std::string status = "ok";
};

struct SweepResult {
    std::vector<SweepCell> cells;
};

inline SweepResult run_sweep(const ExperimentConfig& base, const std::vector<double>& alphas,
                             const std::vector<int>& ks, const LabeledDataset& data) {
    require(!alphas.empty(), "--alpha-grid must be non-empty");
    require(!ks.empty(), "--k-grid must be non-empty");
    SweepResult result;
    std::uint64_t cell_index = 0;
    for (double alpha : alphas) {
        for (int k : ks) {
            ExperimentConfig cfg = base;
            cfg.alpha = alpha;
            cfg.filter_order = k;
            cfg.seed = base.seed + cell_index;
            cfg.repeat = 1;
            cfg.trace_metrics = false;
            ++cell_index;

            SweepCell cell;
            cell.alpha = alpha;
            cell.k = k;
            try {
                const ClusterReport report = run_experiment(cfg, data);
                const RunResult& run = report.runs.front();
                cell.acc = run.acc;
                cell.nmi = run.nmi;
                cell.pur = run.pur;
                cell.iterations = run.iterations();
                cell.converged = run.trace.converged;
            } catch (const ContractViolation&) {
                cell.status = "error:usage";
            } catch (const NumericalError&) {
                cell.status = "error:numerical";
            } catch (const IoError&) {
                cell.status = "error:io";
            }
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    out << "alpha,k,acc,nmi,pur,iterations,converged,status\n";
    for (const SweepCell& cell : sweep.cells) {
        out << detail::fmt(cell.alpha) << ',' << cell.k << ',';
        if (cell.acc) out << detail::fmt(*cell.acc);
        out << ',';
        if (cell.nmi) out << detail::fmt(*cell.nmi);
        out << ',';
        if (cell.pur) out << detail::fmt(*cell.pur);
        out << ',';
        if (cell.iterations) out << *cell.iterations;
        out << ',';
        if (cell.converged) out << detail::bool_text(*cell.converged);
        out << ',' << cell.status << '\n';
    }
}

// ---------------------------------------------------------------------------
// Filtering ablation: corrupt the features once, build one kNN prior graph
// from the corrupted data, then for each filter order k in 0..k_max report
// denoising quality (PSNR/SSIM against the clean originals), class
// separability (mean pairwise Fisher score), and clustering metrics for a
// single-pass self-expression at that k. Every row clusters at the same seed
// so k is the only moving part.

struct AblateConfig {
    std::string data_path;
    std::string labels_path;
    bool data_has_labels = false;
    int height = 0;
    int width = 0;
    double noise_mean = 1.0;
    double noise_sigma = 0.05;
    int k_max = 10;
    int knn = 10;
    Algorithm algo = Algorithm::lsr; // lsr or trr; the filter is the ablation axis
    double alpha = -1.0;
    int keep_per_row = -1;
    int clusters = -1;
    std::uint64_t seed = 0;
    int restarts = 20;
};

struct AblateRow {
    int k = 0;
    double psnr_mean = 0.0;
    double ssim_mean = 0.0;
    double fisher = 0.0;
    double acc = 0.0;
    double nmi = 0.0;
    double pur = 0.0;
};

inline void validate_ablate(const AblateConfig& cfg) {
    require(!cfg.data_path.empty(), "--data is required");
    require(cfg.data_has_labels || !cfg.labels_path.empty(),
            "ablation needs labels; pass --labels or --data-has-labels");
    require(!(cfg.data_has_labels && !cfg.labels_path.empty()),
            "--labels and --data-has-labels are mutually exclusive");
    require(cfg.height >= 1 && cfg.width >= 1, "--height and --width must be >= 1");
    require(cfg.noise_sigma >= 0.0, "--noise-sigma must be >= 0");
    require(cfg.k_max >= 0, "--k-max must be >= 0");
    require(cfg.knn >= 1, "--knn must be >= 1");
    require(!uses_filter(cfg.algo),
            "--algo must be lsr or trr for ablation (the filter order is the swept axis)");
    require(cfg.alpha > 0.0, "--alpha must be > 0");
    if (uses_threshold(cfg.algo))
        require(cfg.keep_per_row >= 1, "--p must be >= 1 for algorithm 'trr'");
    require(cfg.clusters >= 1, "--g must be >= 1");
    require(cfg.restarts >= 1, "--restarts must be >= 1");
}

inline std::vector<AblateRow> run_ablate(const AblateConfig& cfg, const LabeledDataset& data) {
    validate_ablate(cfg);
    require(data.labels.has_value(), "ablation needs labels");
    const Eigen::Index n = data.features.rows();
    require(static_cast<Eigen::Index>(cfg.height) * cfg.width == data.features.cols(),
            "--height * --width must equal the feature count");
    require(cfg.knn < n, "--knn must be below the sample count");
    require(cfg.clusters <= n, "--g exceeds the sample count");
    if (uses_threshold(cfg.algo))
        require(cfg.keep_per_row <= n, "--p exceeds the sample count");
    const Labels& truth = *data.labels;

    const Matrix& clean = data.features;
    const bool corrupting = cfg.noise_mean != 0.0 || cfg.noise_sigma > 0.0;
    const Matrix corrupted =
        corrupting ? add_gaussian_noise(clean, cfg.noise_mean, cfg.noise_sigma, cfg.seed) : clean;

    const NormalizedLaplacian prior = normalized_laplacian(knn_affinity(corrupted, cfg.knn));
    const std::vector<Matrix> clean_images = as_images(clean, cfg.height, cfg.width);

    std::vector<AblateRow> rows;
    for (int k = 0; k <= cfg.k_max; ++k) {
        const Matrix filtered = apply_filter(prior, k, corrupted);

        AblateRow row;
        row.k = k;
        const std::vector<Matrix> filtered_images = as_images(filtered, cfg.height, cfg.width);
        double psnr_sum = 0.0, ssim_sum = 0.0;
        for (std::size_t i = 0; i < clean_images.size(); ++i) {
            const ImagePair pair = make_image_pair(clean_images[i], filtered_images[i]);
            psnr_sum += psnr(pair);
            ssim_sum += ssim(pair);
        }
        row.psnr_mean = psnr_sum / static_cast<double>(clean_images.size());
        row.ssim_mean = ssim_sum / static_cast<double>(clean_images.size());
        row.fisher = pairwise_fisher_mean(filtered, truth);

        Matrix z = lsr_coefficients(filtered, LsrConfig{cfg.alpha, false});
        if (uses_threshold(cfg.algo)) z = trr_threshold(z, cfg.keep_per_row);
        const Matrix affinity = affinity_from_coefficients(z);
        SeededRng rng(cfg.seed);
        const ClusterAssignment asn = cluster(affinity, cfg.clusters, rng, cfg.restarts);
        row.acc = accuracy(asn.labels, truth);
        row.nmi = nmi(asn.labels, truth);
        row.pur = purity(asn.labels, truth);
        rows.push_back(row);
    }
    return rows;
}

inline void write_ablate_csv(std::ostream& out, const std::vector<AblateRow>& rows) {
    out << "k,psnr,ssim,fisher,acc,nmi,pur\n";
    for (const AblateRow& row : rows) {
        out << row.k << ',' << detail::fmt(row.psnr_mean) << ',' << detail::fmt(row.ssim_mean)
            << ',' << detail::fmt(row.fisher) << ',' << detail::fmt(row.acc) << ','
            << detail::fmt(row.nmi) << ',' << detail::fmt(row.pur) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Representation export: runs the fixed-point loop far enough to visit every
// requested iteration (convergence does not cut the loop short) and captures
// the representation produced by each requested iteration's smoothing step.
// With filter order 0 the captured matrix equals the input.

inline std::vector<std::pair<int, Matrix>> run_embed(const ExperimentConfig& cfg,
                                                     std::vector<int> iterations,
                                                     const LabeledDataset& data) {
    validate_experiment(cfg);
    require(uses_filter(cfg.algo), "--algo must be flsr or ftrr for embedding export");
    require(!iterations.empty(), "--iterations must be non-empty");
    for (int t : iterations) require(t >= 1, "--iterations entries must be >= 1");
    std::sort(iterations.begin(), iterations.end());
    iterations.erase(std::unique(iterations.begin(), iterations.end()), iterations.end());
    const int last = iterations.back();

    const Matrix x = cfg.standardize ? standardized(data.features) : data.features;
    std::vector<std::pair<int, Matrix>> captured;
    RunOptions options;
    options.min_iterations = last;
    std::size_t next = 0;
    options.observer = [&](int t, const Matrix& smoothed, const Matrix&) {
        if (next < iterations.size() && iterations[next] == t) {
            captured.emplace_back(t, smoothed);
            ++next;
        }
    };
    IterationConfig iteration{cfg.filter_order, cfg.epsilon,
                              std::max(cfg.max_iter, last), cfg.refilter_previous};
    run_flsr(x, LsrConfig{cfg.alpha, cfg.zero_diag}, iteration, options);
    return captured;
}

} // namespace gfsc
