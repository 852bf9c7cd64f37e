// Command line front end: cluster / sweep / ablate / embed / gen.
//
// Exit codes: 0 success, 1 usage, 2 I/O or parse failure, 3 numerical failure.
// Results go to files named by --out; stderr carries diagnostics only.

#include "CLI11.hpp"

#include "gfsc/gfsc.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace {

double config_double(const std::string& key, const std::string& value) {
    double out;
    if (!gfsc::detail::parse_double(value, out))
        throw gfsc::ContractViolation("config key '" + key + "': cannot parse '" + value +
                                      "' as a number");
    return out;
}

long long config_int(const std::string& key, const std::string& value) {
    const std::string_view token = gfsc::detail::trim(value);
    long long out;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw gfsc::ContractViolation("config key '" + key + "': cannot parse '" + value +
                                      "' as an integer");
    return out;
}

std::uint64_t config_u64(const std::string& key, const std::string& value) {
    const std::string_view token = gfsc::detail::trim(value);
    std::uint64_t out;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw gfsc::ContractViolation("config key '" + key + "': cannot parse '" + value +
                                      "' as an unsigned integer");
    return out;
}

bool config_bool(const std::string& key, const std::string& value) {
    const std::string_view token = gfsc::detail::trim(value);
    if (token == "true" || token == "1") return true;
    if (token == "false" || token == "0") return false;
    throw gfsc::ContractViolation("config key '" + key + "': expected true or false, got '" +
                                  value + "'");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::string_view rest = text;
    while (true) {
        const std::size_t comma = rest.find(',');
        parts.emplace_back(gfsc::detail::trim(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return parts;
}

std::vector<double> split_doubles(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const std::string& part : split_list(text)) out.push_back(config_double(key, part));
    return out;
}

std::vector<int> split_ints(const std::string& key, const std::string& text) {
    std::vector<int> out;
    for (const std::string& part : split_list(text))
        out.push_back(static_cast<int>(config_int(key, part)));
    return out;
}

// Config files reuse the report grammar: `key = value` lines keyed by long
// option names. Values given on the command line win; result/time echo keys
// are skipped; anything else unknown is a usage error.
class ConfigMerge {
public:
    void bind(CLI::Option* option, std::string key,
              std::function<void(const std::string&)> apply) {
        entries_.push_back({std::move(key), option, std::move(apply)});
    }

    void apply_file(const std::string& path) const {
        const gfsc::ConfigFile file = gfsc::load_config_file(path);
        for (const auto& [key, value] : file.entries) {
            if (gfsc::is_report_only_key(key)) continue;
            const Entry* hit = nullptr;
            for (const Entry& entry : entries_) {
                if (entry.key == key) {
                    hit = &entry;
                    break;
                }
            }
            if (!hit)
                throw gfsc::ContractViolation("unknown config key '" + key + "' in " + path);
            if (hit->option != nullptr && hit->option->count() > 0) continue;
            hit->apply(value);
        }
    }

private:
    struct Entry {
        std::string key;
        CLI::Option* option;
        std::function<void(const std::string&)> apply;
    };
    std::vector<Entry> entries_;
};

void bind_string(ConfigMerge& merge, CLI::Option* opt, const std::string& key, std::string& target) {
    merge.bind(opt, key, [&target](const std::string& v) { target = v; });
}
void bind_double(ConfigMerge& merge, CLI::Option* opt, const std::string& key, double& target) {
    merge.bind(opt, key, [&target, key](const std::string& v) { target = config_double(key, v); });
}
void bind_int(ConfigMerge& merge, CLI::Option* opt, const std::string& key, int& target) {
    merge.bind(opt, key,
               [&target, key](const std::string& v) { target = static_cast<int>(config_int(key, v)); });
}
void bind_u64(ConfigMerge& merge, CLI::Option* opt, const std::string& key, std::uint64_t& target) {
    merge.bind(opt, key, [&target, key](const std::string& v) { target = config_u64(key, v); });
}
void bind_bool(ConfigMerge& merge, CLI::Option* opt, const std::string& key, bool& target) {
    merge.bind(opt, key, [&target, key](const std::string& v) { target = config_bool(key, v); });
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw gfsc::IoError("cannot write " + path);
    out << content;
    if (!out) throw gfsc::IoError("write failed for " + path);
}

// Shared state for the cluster-like subcommands.
struct ExperimentArgs {
    gfsc::ExperimentConfig cfg;
    std::string algo_name = "flsr";
    std::string out;
    std::string config_path;
    ConfigMerge merge;
};

// Registers the options shared by cluster and embed; `merge` keys mirror the
// long option names so report files load back as configs.
void add_experiment_options(CLI::App* cmd, ExperimentArgs& args, bool clustering) {
    auto& cfg = args.cfg;
    auto& merge = args.merge;
    bind_string(merge, cmd->add_option("--data", cfg.data_path, "feature matrix (CSV or SMCL1)"),
                "data", cfg.data_path);
    bind_bool(merge,
              cmd->add_flag("--data-has-labels", cfg.data_has_labels,
                            "treat the final CSV column as integer labels"),
              "data-has-labels", cfg.data_has_labels);
    bind_string(merge, cmd->add_option("--algo", args.algo_name, "lsr, trr, flsr or ftrr"),
                "algo", args.algo_name);
    bind_double(merge, cmd->add_option("--alpha", cfg.alpha, "ridge weight (> 0)"), "alpha",
                cfg.alpha);
    bind_int(merge, cmd->add_option("--k", cfg.filter_order, "filter order for flsr/ftrr"), "k",
             cfg.filter_order);
    bind_double(merge,
                cmd->add_option("--epsilon", cfg.epsilon, "fixed-point stopping threshold"),
                "epsilon", cfg.epsilon);
    bind_int(merge, cmd->add_option("--max-iter", cfg.max_iter, "fixed-point iteration cap"),
             "max-iter", cfg.max_iter);
    bind_bool(merge,
              cmd->add_flag("--zero-diag", cfg.zero_diag,
                            "zero the self-representation diagonal"),
              "zero-diag", cfg.zero_diag);
    bind_bool(merge,
              cmd->add_flag("--standardize", cfg.standardize,
                            "per-feature zero mean, unit variance"),
              "standardize", cfg.standardize);
    bind_bool(merge,
              cmd->add_flag("--refilter-previous", cfg.refilter_previous,
                            "smooth the previous iterate instead of the raw input"),
              "refilter-previous", cfg.refilter_previous);
    bind_string(merge, cmd->add_option("--out", args.out, "output path"), "out", args.out);
    cmd->add_option("--config", args.config_path,
                    "key = value config file; command-line flags win");
    if (clustering) {
        bind_string(merge,
                    cmd->add_option("--labels", cfg.labels_path, "ground-truth labels file"),
                    "labels", cfg.labels_path);
        bind_int(merge, cmd->add_option("--p", cfg.keep_per_row, "kept entries per row for trr/ftrr"),
                 "p", cfg.keep_per_row);
        bind_int(merge, cmd->add_option("--g", cfg.clusters, "number of clusters"), "g",
                 cfg.clusters);
        bind_u64(merge, cmd->add_option("--seed", cfg.seed, "random seed"), "seed", cfg.seed);
        bind_int(merge, cmd->add_option("--restarts", cfg.restarts, "k-means restarts"),
                 "restarts", cfg.restarts);
    }
}

int run_cluster(ExperimentArgs& args) {
    if (!args.config_path.empty()) args.merge.apply_file(args.config_path);
    args.cfg.algo = gfsc::parse_algorithm(args.algo_name);
    gfsc::require(!args.out.empty(), "--out is required");

    const gfsc::ClusterReport report = gfsc::run_experiment(args.cfg);
    write_text_file(args.out, gfsc::format_report(report));
    gfsc::save_labels(report.runs.front().labels, args.out + ".labels");
    std::cerr << "wrote " << args.out << " and " << args.out << ".labels\n";
    return 0;
}

struct SweepArgs {
    ExperimentArgs base;
    std::string alpha_grid;
    std::string k_grid;
};

int run_sweep(SweepArgs& args) {
    if (!args.base.config_path.empty()) args.base.merge.apply_file(args.base.config_path);
    gfsc::ExperimentConfig& cfg = args.base.cfg;
    cfg.algo = gfsc::parse_algorithm(args.base.algo_name);
    gfsc::require(!args.base.out.empty(), "--out is required");
    gfsc::require(!args.alpha_grid.empty(), "--alpha-grid is required");
    const std::vector<double> alphas = split_doubles("alpha-grid", args.alpha_grid);
    std::vector<int> ks;
    if (args.k_grid.empty()) {
        gfsc::require(!gfsc::uses_filter(cfg.algo), "--k-grid is required for flsr/ftrr");
        ks = {0};
    } else {
        ks = split_ints("k-grid", args.k_grid);
    }

    // surface bad fixed fields as a usage error up front, before cells run
    gfsc::ExperimentConfig probe = cfg;
    probe.alpha = 1.0;
    probe.filter_order = 0;
    gfsc::validate_experiment(probe);

    const gfsc::LabeledDataset data = gfsc::load_experiment_data(cfg);
    const gfsc::SweepResult result = gfsc::run_sweep(cfg, alphas, ks, data);
    std::ostringstream csv;
    gfsc::write_sweep_csv(csv, result);
    write_text_file(args.base.out, csv.str());
    std::cerr << "wrote " << args.base.out << '\n';
    return 0;
}

struct AblateArgs {
    gfsc::AblateConfig cfg;
    std::string algo_name = "lsr";
    std::string out;
    std::string config_path;
    ConfigMerge merge;
};

int run_ablate(AblateArgs& args) {
    if (!args.config_path.empty()) args.merge.apply_file(args.config_path);
    args.cfg.algo = gfsc::parse_algorithm(args.algo_name);
    gfsc::require(!args.out.empty(), "--out is required");

    gfsc::ExperimentConfig loader;
    loader.data_path = args.cfg.data_path;
    loader.labels_path = args.cfg.labels_path;
    loader.data_has_labels = args.cfg.data_has_labels;
    const gfsc::LabeledDataset data = gfsc::load_experiment_data(loader);

    const std::vector<gfsc::AblateRow> rows = gfsc::run_ablate(args.cfg, data);
    std::ostringstream csv;
    gfsc::write_ablate_csv(csv, rows);
    write_text_file(args.out, csv.str());
    std::cerr << "wrote " << args.out << '\n';
    return 0;
}

struct EmbedArgs {
    ExperimentArgs base;
    std::string iterations;
};

int run_embed(EmbedArgs& args) {
    if (!args.base.config_path.empty()) args.base.merge.apply_file(args.base.config_path);
    gfsc::ExperimentConfig& cfg = args.base.cfg;
    cfg.algo = gfsc::parse_algorithm(args.base.algo_name);
    cfg.clusters = 1; // the export never reaches the clustering stage
    gfsc::require(!args.base.out.empty(), "--out is required");
    gfsc::require(!args.iterations.empty(), "--iterations is required");
    const std::vector<int> wanted = split_ints("iterations", args.iterations);

    const gfsc::LabeledDataset data = gfsc::load_experiment_data(cfg);
    const auto captured = gfsc::run_embed(cfg, wanted, data);
    for (const auto& [iteration, matrix] : captured) {
        const std::string path = args.base.out + ".iter" + std::to_string(iteration) + ".csv";
        gfsc::save_csv(matrix, path);
        std::cerr << "wrote " << path << '\n';
    }
    return 0;
}

struct GenArgs {
    gfsc::SubspaceSpec spec;
    std::string out;
    std::string labels_out;
    bool binary = false;
    std::string config_path;
    ConfigMerge merge;
};

int run_gen(GenArgs& args) {
    if (!args.config_path.empty()) args.merge.apply_file(args.config_path);
    gfsc::require(!args.out.empty(), "--out is required");
    const gfsc::LabeledDataset data = gfsc::gen_subspaces(args.spec);
    if (args.binary)
        gfsc::write_smcl(data.features, args.out);
    else
        gfsc::save_csv(data.features, args.out);
    const std::string labels_path =
        args.labels_out.empty() ? args.out + ".labels" : args.labels_out;
    gfsc::save_labels(*data.labels, labels_path);
    std::cerr << "wrote " << args.out << " and " << labels_path << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph-filtered subspace clustering toolkit"};
    app.set_version_flag("--version", "gfsc 0.1.0");
    app.require_subcommand(1);

    ExperimentArgs cluster_args;
    CLI::App* cluster_cmd =
        app.add_subcommand("cluster", "run one clustering experiment and write a report");
    add_experiment_options(cluster_cmd, cluster_args, true);
    bind_int(cluster_args.merge,
             cluster_cmd->add_option("--repeat", cluster_args.cfg.repeat,
                                     "independent runs at seeds seed..seed+R-1"),
             "repeat", cluster_args.cfg.repeat);
    bind_bool(cluster_args.merge,
              cluster_cmd->add_flag("--trace-metrics", cluster_args.cfg.trace_metrics,
                                    "cluster after every iteration and record ACC/NMI/PUR"),
              "trace-metrics", cluster_args.cfg.trace_metrics);
    cluster_cmd->callback([&]() { run_cluster(cluster_args); });

    SweepArgs sweep_args;
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "grid over (alpha, k) and write one CSV row per cell");
    add_experiment_options(sweep_cmd, sweep_args.base, true);
    bind_string(sweep_args.base.merge,
                sweep_cmd->add_option("--alpha-grid", sweep_args.alpha_grid,
                                      "comma-separated alpha values"),
                "alpha-grid", sweep_args.alpha_grid);
    bind_string(sweep_args.base.merge,
                sweep_cmd->add_option("--k-grid", sweep_args.k_grid,
                                      "comma-separated filter orders"),
                "k-grid", sweep_args.k_grid);
    sweep_cmd->callback([&]() { run_sweep(sweep_args); });

    AblateArgs ablate_args;
    CLI::App* ablate_cmd = app.add_subcommand(
        "ablate", "sweep the filter order and report denoising/separability/clustering metrics");
    {
        auto& cfg = ablate_args.cfg;
        auto& merge = ablate_args.merge;
        bind_string(merge,
                    ablate_cmd->add_option("--data", cfg.data_path, "feature matrix (CSV or SMCL1)"),
                    "data", cfg.data_path);
        bind_string(merge,
                    ablate_cmd->add_option("--labels", cfg.labels_path, "ground-truth labels file"),
                    "labels", cfg.labels_path);
        bind_bool(merge,
                  ablate_cmd->add_flag("--data-has-labels", cfg.data_has_labels,
                                       "treat the final CSV column as integer labels"),
                  "data-has-labels", cfg.data_has_labels);
        bind_int(merge, ablate_cmd->add_option("--height", cfg.height, "image height"), "height",
                 cfg.height);
        bind_int(merge, ablate_cmd->add_option("--width", cfg.width, "image width"), "width",
                 cfg.width);
        bind_double(merge,
                    ablate_cmd->add_option("--noise-mean", cfg.noise_mean, "corruption offset"),
                    "noise-mean", cfg.noise_mean);
        bind_double(merge,
                    ablate_cmd->add_option("--noise-sigma", cfg.noise_sigma, "corruption scale"),
                    "noise-sigma", cfg.noise_sigma);
        bind_int(merge, ablate_cmd->add_option("--k-max", cfg.k_max, "largest filter order"),
                 "k-max", cfg.k_max);
        bind_int(merge,
                 ablate_cmd->add_option("--knn", cfg.knn, "neighbors for the prior graph"),
                 "knn", cfg.knn);
        bind_string(merge, ablate_cmd->add_option("--algo", ablate_args.algo_name, "lsr or trr"),
                    "algo", ablate_args.algo_name);
        bind_double(merge, ablate_cmd->add_option("--alpha", cfg.alpha, "ridge weight (> 0)"),
                    "alpha", cfg.alpha);
        bind_int(merge,
                 ablate_cmd->add_option("--p", cfg.keep_per_row, "kept entries per row for trr"),
                 "p", cfg.keep_per_row);
        bind_int(merge, ablate_cmd->add_option("--g", cfg.clusters, "number of clusters"), "g",
                 cfg.clusters);
        bind_u64(merge, ablate_cmd->add_option("--seed", cfg.seed, "random seed"), "seed",
                 cfg.seed);
        bind_int(merge, ablate_cmd->add_option("--restarts", cfg.restarts, "k-means restarts"),
                 "restarts", cfg.restarts);
        bind_string(merge, ablate_cmd->add_option("--out", ablate_args.out, "output CSV path"),
                    "out", ablate_args.out);
        ablate_cmd->add_option("--config", ablate_args.config_path,
                               "key = value config file; command-line flags win");
    }
    ablate_cmd->callback([&]() { run_ablate(ablate_args); });

    EmbedArgs embed_args;
    CLI::App* embed_cmd = app.add_subcommand(
        "embed", "export the smoothed representation at chosen iterations");
    add_experiment_options(embed_cmd, embed_args.base, false);
    bind_string(embed_args.base.merge,
                embed_cmd->add_option("--iterations", embed_args.iterations,
                                      "comma-separated iteration numbers (1-based)"),
                "iterations", embed_args.iterations);
    embed_cmd->callback([&]() { run_embed(embed_args); });

    GenArgs gen_args;
    CLI::App* gen_cmd =
        app.add_subcommand("gen", "generate a union-of-subspaces fixture with labels");
    {
        auto& spec = gen_args.spec;
        auto& merge = gen_args.merge;
        bind_int(merge, gen_cmd->add_option("--m", spec.ambient_dim, "ambient dimension"), "m",
                 spec.ambient_dim);
        bind_int(merge, gen_cmd->add_option("--d", spec.subspace_dim, "subspace dimension"), "d",
                 spec.subspace_dim);
        bind_int(merge, gen_cmd->add_option("--g", spec.clusters, "number of subspaces"), "g",
                 spec.clusters);
        bind_int(merge,
                 gen_cmd->add_option("--per-cluster", spec.samples_per_cluster,
                                     "samples per subspace"),
                 "per-cluster", spec.samples_per_cluster);
        bind_double(merge, gen_cmd->add_option("--sigma", spec.noise_sigma, "ambient noise scale"),
                    "sigma", spec.noise_sigma);
        bind_u64(merge, gen_cmd->add_option("--seed", spec.seed, "random seed"), "seed",
                 spec.seed);
        merge.bind(gen_cmd->add_flag("--orthogonal", spec.orthogonal_bases,
                                     "slice all bases from one orthonormal frame"),
                   "orthogonal", [&spec](const std::string& v) {
                       spec.orthogonal_bases = config_bool("orthogonal", v);
                   });
        merge.bind(gen_cmd->add_flag("--binary", gen_args.binary, "write SMCL1 instead of CSV"),
                   "binary", [&gen_args](const std::string& v) {
                       gen_args.binary = config_bool("binary", v);
                   });
        bind_string(merge, gen_cmd->add_option("--out", gen_args.out, "features output path"),
                    "out", gen_args.out);
        bind_string(merge,
                    gen_cmd->add_option("--labels-out", gen_args.labels_out,
                                        "labels output path (default <out>.labels)"),
                    "labels-out", gen_args.labels_out);
        gen_cmd->add_option("--config", gen_args.config_path,
                            "key = value config file; command-line flags win");
    }
    gen_cmd->callback([&]() { run_gen(gen_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help or the parse message
        return code == 0 ? 0 : 1;
    } catch (const gfsc::ContractViolation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const gfsc::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const gfsc::NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
