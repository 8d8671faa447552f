#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "odefs/dataset.hpp"
#include "odefs/ensemble.hpp"

namespace odefs {

struct ReportFlags {
    bool scores_csv = true;
    bool model_json = true;
    bool training_traces = false;
    bool plots = false;
};

struct ExperimentConfig {
    std::vector<std::size_t> ratios = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    std::vector<double> fractions = {0.05, 0.10, 0.20, 0.35, 0.50, 1.00};
    std::vector<std::pair<std::size_t, std::size_t>> sizes_n = {
        {1000, 100}, {2000, 100}, {4000, 100}, {8000, 100}};
    std::vector<std::pair<std::size_t, std::size_t>> sizes_d = {
        {1000, 100}, {1000, 200}, {1000, 400}, {1000, 800}};
    std::size_t repeats = 20;
    std::size_t workers = 2;
};

/// Everything one run needs: exactly one of {input path, synthetic spec},
/// detector parameters, output directory and report switches.
struct RunConfig {
    std::optional<std::filesystem::path> input;
    std::optional<std::string> label_column;
    std::optional<SyntheticSpec> synthetic;
    OdefsParams params;
    std::filesystem::path output_dir = "out";
    ReportFlags reports;
    ExperimentConfig experiment;

    void validate() const;
};

RunConfig load_config(const std::filesystem::path& json_path);
std::string config_to_json(const RunConfig& config);

/// Scores the configured dataset, writes scores.csv / metrics.csv /
/// model.json (plus optional traces) under output_dir. Returns the process
/// exit status.
int cmd_detect(const RunConfig& config);

/// Writes the configured synthetic dataset as a labeled CSV.
int cmd_synth(const SyntheticSpec& spec, const std::filesystem::path& output_path);

/// name is one of "sweep-m", "noise", "scalability".
int cmd_experiment(const std::string& name, const RunConfig& config);

/// Maps an ErrorCode to the CLI exit status (nonzero).
int exit_status_for(const class Error& error);

}  // namespace odefs
