#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "odefs/cli_commands.hpp"
#include "odefs/errors.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string input;
    std::string label_column;
    bool use_synthetic = false;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> a;
    std::optional<std::size_t> m_star;
    std::optional<std::size_t> unlabeled_ratio;
    std::optional<double> epsilon;
    std::optional<int> threads;
    std::optional<std::size_t> repeats;
    bool traces = false;
    bool plots = false;

    // synthetic overrides
    std::optional<std::size_t> n, d, d_relevant;
    std::optional<double> fraction;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--input", flags.input, "input CSV (header row required)");
    cmd->add_option("--label-column", flags.label_column, "name of the 0/1 label column");
    cmd->add_flag("--synthetic", flags.use_synthetic, "use the built-in synthetic generator");
    cmd->add_option("--out-dir", flags.output_dir, "output directory");
    cmd->add_option("--seed", flags.seed, "root seed");
    cmd->add_option("--a", flags.a, "thresholding rate");
    cmd->add_option("--m-star", flags.m_star, "outlier examples per component (0 = auto)");
    cmd->add_option("--unlabeled-ratio", flags.unlabeled_ratio, "m = ratio * m_star");
    cmd->add_option("--epsilon", flags.epsilon, "relative feature-weight threshold");
    cmd->add_option("--threads", flags.threads, "worker threads (0 = all)");
    cmd->add_option("--repeats", flags.repeats, "experiment repeats");
    cmd->add_flag("--traces", flags.traces, "emit per-component training traces");
    cmd->add_flag("--plots", flags.plots, "emit SVG charts");
    cmd->add_option("--n", flags.n, "synthetic rows");
    cmd->add_option("--d", flags.d, "synthetic features");
    cmd->add_option("--d-relevant", flags.d_relevant, "synthetic relevant features");
    cmd->add_option("--fraction", flags.fraction, "synthetic outlier fraction");
}

odefs::RunConfig build_config(const CommonFlags& flags) {
    odefs::RunConfig config;
    if (!flags.config_path.empty()) config = odefs::load_config(flags.config_path);
    if (!flags.input.empty()) {
        config.input = flags.input;
        config.synthetic.reset();
    }
    if (!flags.label_column.empty()) config.label_column = flags.label_column;
    if (flags.use_synthetic && !config.synthetic) {
        config.synthetic = odefs::SyntheticSpec{};
        config.input.reset();
    }
    if (config.synthetic) {
        if (flags.n) config.synthetic->n = *flags.n;
        if (flags.d) config.synthetic->d = *flags.d;
        if (flags.d_relevant) config.synthetic->d_relevant = *flags.d_relevant;
        if (flags.fraction) config.synthetic->outlier_fraction = *flags.fraction;
        if (flags.seed) config.synthetic->seed = *flags.seed;
    }
    if (!flags.output_dir.empty()) config.output_dir = flags.output_dir;
    if (flags.seed) config.params.seed = *flags.seed;
    if (flags.a) config.params.a = *flags.a;
    if (flags.m_star) config.params.m_star = *flags.m_star;
    if (flags.unlabeled_ratio) config.params.unlabeled_ratio = *flags.unlabeled_ratio;
    if (flags.epsilon) config.params.epsilon = *flags.epsilon;
    if (flags.threads) config.params.threads = *flags.threads;
    if (flags.repeats) config.experiment.repeats = *flags.repeats;
    if (flags.traces) config.reports.training_traces = true;
    if (flags.plots) config.reports.plots = true;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"odefs: outlier detection ensemble with embedded feature selection"};
    app.require_subcommand(1);

    CommonFlags detect_flags, synth_flags, experiment_flags;

    auto* detect = app.add_subcommand("detect", "score a dataset and report metrics");
    add_common(detect, detect_flags);

    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic benchmark CSV");
    std::string synth_out = "synthetic.csv";
    synth->add_option("--out", synth_out, "output CSV path");
    add_common(synth, synth_flags);

    auto* experiment = app.add_subcommand("experiment", "run an experiment sweep");
    std::string experiment_name;
    experiment->add_option("name", experiment_name, "sweep-m | noise | scalability")->required();
    add_common(experiment, experiment_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (detect->parsed()) {
            return odefs::cmd_detect(build_config(detect_flags));
        }
        if (synth->parsed()) {
            synth_flags.use_synthetic = true;
            auto config = build_config(synth_flags);
            return odefs::cmd_synth(*config.synthetic, synth_out);
        }
        if (experiment->parsed()) {
            if (!experiment_flags.use_synthetic && experiment_flags.config_path.empty()) {
                experiment_flags.use_synthetic = true;  // experiments run on synthetic data
            }
            return odefs::cmd_experiment(experiment_name, build_config(experiment_flags));
        }
    } catch (const odefs::Error& e) {
        std::cerr << "error: " << e.code_name() << ": " << e.what() << "\n";
        return odefs::exit_status_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: INTERNAL: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
