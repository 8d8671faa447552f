#include "odefs/cli_commands.hpp"

#include <charconv>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "odefs/errors.hpp"
#include "odefs/experiments.hpp"
#include "odefs/metrics.hpp"
#include "odefs/svg_chart.hpp"

namespace odefs {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

SyntheticSpec spec_from_json(const json& j) {
    SyntheticSpec spec;
    spec.n = j.value("n", spec.n);
    spec.d = j.value("d", spec.d);
    spec.d_relevant = j.value("d_relevant", spec.d_relevant);
    spec.outlier_fraction = j.value("outlier_fraction", spec.outlier_fraction);
    spec.inlier_mean = j.value("inlier_mean", spec.inlier_mean);
    spec.outlier_mean = j.value("outlier_mean", spec.outlier_mean);
    spec.stddev = j.value("std", spec.stddev);
    spec.seed = j.value("seed", spec.seed);
    return spec;
}

json spec_to_json(const SyntheticSpec& spec) {
    return json{{"n", spec.n},
                {"d", spec.d},
                {"d_relevant", spec.d_relevant},
                {"outlier_fraction", spec.outlier_fraction},
                {"inlier_mean", spec.inlier_mean},
                {"outlier_mean", spec.outlier_mean},
                {"std", spec.stddev},
                {"seed", spec.seed}};
}

void params_from_json(const json& j, OdefsParams& params) {
    params.a = j.value("a", params.a);
    params.m_star = j.value("m_star", params.m_star);
    params.unlabeled_ratio = j.value("unlabeled_ratio", params.unlabeled_ratio);
    if (j.contains("ensemble_size") && !j["ensemble_size"].is_null()) {
        params.ensemble_size = j["ensemble_size"].get<std::size_t>();
    }
    params.epsilon = j.value("epsilon", params.epsilon);
    params.seed = j.value("seed", params.seed);
    params.threads = j.value("threads", params.threads);
    if (j.contains("lesinn")) {
        const auto& l = j["lesinn"];
        params.lesinn.subsets = l.value("subsets", params.lesinn.subsets);
        params.lesinn.subsample_size = l.value("subsample_size", params.lesinn.subsample_size);
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        params.train.theta = t.value("theta", params.train.theta);
        params.train.max_outer_iterations =
            t.value("max_outer_iterations", params.train.max_outer_iterations);
        params.train.outer_tolerance = t.value("outer_tolerance", params.train.outer_tolerance);
        params.train.inner_max_steps = t.value("inner_max_steps", params.train.inner_max_steps);
        params.train.inner_initial_step =
            t.value("inner_initial_step", params.train.inner_initial_step);
        params.train.inner_tolerance = t.value("inner_tolerance", params.train.inner_tolerance);
    }
}

json params_to_json(const OdefsParams& params) {
    json j{{"a", params.a},
           {"m_star", params.m_star},
           {"unlabeled_ratio", params.unlabeled_ratio},
           {"epsilon", params.epsilon},
           {"seed", params.seed},
           {"threads", params.threads},
           {"lesinn",
            {{"subsets", params.lesinn.subsets}, {"subsample_size", params.lesinn.subsample_size}}},
           {"train",
            {{"theta", params.train.theta},
             {"max_outer_iterations", params.train.max_outer_iterations},
             {"outer_tolerance", params.train.outer_tolerance},
             {"inner_max_steps", params.train.inner_max_steps},
             {"inner_initial_step", params.train.inner_initial_step},
             {"inner_tolerance", params.train.inner_tolerance}}}};
    if (params.ensemble_size) {
        j["ensemble_size"] = *params.ensemble_size;
    } else {
        j["ensemble_size"] = nullptr;
    }
    return j;
}

json model_to_json(const EnsembleModel& model) {
    json components = json::array();
    for (std::size_t i = 0; i < model.components.size(); ++i) {
        const auto& c = model.components[i];
        components.push_back(json{{"component", c.component_index},
                                  {"d_prime", c.selected_count},
                                  {"loss", c.loss},
                                  {"u", model.aggregation_weights[i]},
                                  {"features", c.feature_set}});
    }
    return json{{"candidate_set",
                 {{"n_star", model.candidate_set.indices.size()},
                  {"mu", model.candidate_set.mu},
                  {"sigma", model.candidate_set.sigma},
                  {"a", model.candidate_set.a}}},
                {"m_star", model.m_star},
                {"m", model.unlabeled_count},
                {"ensemble_size", model.ensemble_size},
                {"dropped_components", model.dropped_components},
                {"components", components}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::io, "cannot write " + path.string());
    f << text;
}

void write_scores_csv(const std::filesystem::path& path, std::span<const double> scores,
                      std::span<const std::uint8_t> labels) {
    auto order = ranking(scores);
    std::vector<std::uint32_t> rank_of(scores.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank_of[order[r]] = static_cast<std::uint32_t>(r + 1);

    std::string out = labels.empty() ? "index,score,rank\n" : "index,score,rank,label\n";
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out += std::to_string(i);
        out.push_back(',');
        out += fmt_double(scores[i]);
        out.push_back(',');
        out += std::to_string(rank_of[i]);
        if (!labels.empty()) {
            out.push_back(',');
            out.push_back(labels[i] ? '1' : '0');
        }
        out.push_back('\n');
    }
    write_text(path, out);
}

void write_traces_csv(const std::filesystem::path& path, const EnsembleModel& model) {
    std::string out = "component,iteration,lambda,selected,objective\n";
    for (const auto& c : model.components) {
        for (const auto& row : c.trace) {
            out += std::to_string(c.component_index) + "," + std::to_string(row.iteration) + "," +
                   fmt_double(row.lambda) + "," + std::to_string(row.selected) + "," +
                   fmt_double(row.objective) + "\n";
        }
    }
    write_text(path, out);
}

}  // namespace

void RunConfig::validate() const {
    if (input.has_value() == synthetic.has_value()) {
        throw Error(ErrorCode::config,
                    "config: exactly one of 'input' and 'synthetic' must be present");
    }
    if (synthetic) synthetic->validate();
    params.validate();
    if (output_dir.empty()) throw Error(ErrorCode::config, "config: output_dir must not be empty");
}

RunConfig load_config(const std::filesystem::path& json_path) {
    std::ifstream f(json_path);
    if (!f) throw Error(ErrorCode::io, "cannot open config " + json_path.string());
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse, "config " + json_path.string() + ": " + e.what());
    }

    RunConfig config;
    try {
        if (j.contains("input") && !j["input"].is_null()) {
            config.input = std::filesystem::path(j["input"].get<std::string>());
        }
        if (j.contains("label_column") && !j["label_column"].is_null()) {
            config.label_column = j["label_column"].get<std::string>();
        }
        if (j.contains("synthetic") && !j["synthetic"].is_null()) {
            config.synthetic = spec_from_json(j["synthetic"]);
        }
        if (j.contains("params")) params_from_json(j["params"], config.params);
        if (j.contains("seed")) config.params.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("output_dir")) config.output_dir = j["output_dir"].get<std::string>();
        if (j.contains("reports")) {
            const auto& r = j["reports"];
            config.reports.scores_csv = r.value("scores_csv", config.reports.scores_csv);
            config.reports.model_json = r.value("model_json", config.reports.model_json);
            config.reports.training_traces =
                r.value("training_traces", config.reports.training_traces);
            config.reports.plots = r.value("plots", config.reports.plots);
        }
        if (j.contains("experiment")) {
            const auto& e = j["experiment"];
            if (e.contains("ratios")) {
                config.experiment.ratios = e["ratios"].get<std::vector<std::size_t>>();
            }
            if (e.contains("fractions")) {
                config.experiment.fractions = e["fractions"].get<std::vector<double>>();
            }
            if (e.contains("sizes_n")) {
                config.experiment.sizes_n =
                    e["sizes_n"].get<std::vector<std::pair<std::size_t, std::size_t>>>();
            }
            if (e.contains("sizes_d")) {
                config.experiment.sizes_d =
                    e["sizes_d"].get<std::vector<std::pair<std::size_t, std::size_t>>>();
            }
            config.experiment.repeats = e.value("repeats", config.experiment.repeats);
            config.experiment.workers = e.value("workers", config.experiment.workers);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse, "config " + json_path.string() + ": " + e.what());
    }
    return config;
}

std::string config_to_json(const RunConfig& config) {
    json j;
    if (config.input) j["input"] = config.input->string();
    if (config.label_column) j["label_column"] = *config.label_column;
    if (config.synthetic) j["synthetic"] = spec_to_json(*config.synthetic);
    j["params"] = params_to_json(config.params);
    j["output_dir"] = config.output_dir.string();
    j["reports"] = json{{"scores_csv", config.reports.scores_csv},
                        {"model_json", config.reports.model_json},
                        {"training_traces", config.reports.training_traces},
                        {"plots", config.reports.plots}};
    j["experiment"] = json{{"ratios", config.experiment.ratios},
                           {"fractions", config.experiment.fractions},
                           {"sizes_n", config.experiment.sizes_n},
                           {"sizes_d", config.experiment.sizes_d},
                           {"repeats", config.experiment.repeats},
                           {"workers", config.experiment.workers}};
    return j.dump(2) + "\n";
}

int cmd_detect(const RunConfig& config) {
    config.validate();

    Dataset raw = config.input ? load_csv(*config.input, config.label_column)
                               : generate_synthetic(*config.synthetic);
    auto [data, norm] = minmax_normalize(raw);
    (void)norm;

    auto [scores, model] = run_odefs(data, config.params);

    std::filesystem::create_directories(config.output_dir);
    write_text(config.output_dir / "effective_config.json", config_to_json(config));

    if (config.reports.scores_csv) {
        write_scores_csv(config.output_dir / "scores.csv", scores, data.labels);
    }
    if (config.reports.model_json) {
        write_text(config.output_dir / "model.json", model_to_json(model).dump(2) + "\n");
    }
    if (config.reports.training_traces) {
        write_traces_csv(config.output_dir / "traces.csv", model);
    }

    if (data.has_labels()) {
        auto odefs_report = evaluate(scores, data.labels);
        auto bare_report = evaluate(model.initial_scores, data.labels);
        std::string metrics = "method,auc,p_at_k,k\n";
        metrics += "odefs," + fmt_double(odefs_report.auc) + "," +
                   fmt_double(odefs_report.precision_at_k) + "," + std::to_string(odefs_report.k) +
                   "\n";
        metrics += "bare," + fmt_double(bare_report.auc) + "," +
                   fmt_double(bare_report.precision_at_k) + "," + std::to_string(bare_report.k) +
                   "\n";
        write_text(config.output_dir / "metrics.csv", metrics);
        std::cout << "auc=" << odefs_report.auc << " p@k=" << odefs_report.precision_at_k
                  << " (bare auc=" << bare_report.auc << " p@k=" << bare_report.precision_at_k
                  << ", k=" << odefs_report.k << ")\n";
    }
    std::cout << "n=" << data.rows << " d=" << data.cols
              << " candidates=" << model.candidate_set.indices.size()
              << " components=" << model.components.size() << "/" << model.ensemble_size
              << " outputs in " << config.output_dir.string() << "\n";
    return 0;
}

int cmd_synth(const SyntheticSpec& spec, const std::filesystem::path& output_path) {
    auto data = generate_synthetic(spec);
    if (output_path.has_parent_path()) std::filesystem::create_directories(output_path.parent_path());
    write_csv(data, output_path);
    std::cout << "wrote " << data.rows << "x" << data.cols << " dataset ("
              << spec.outlier_count() << " outliers) to " << output_path.string() << "\n";
    return 0;
}

int cmd_experiment(const std::string& name, const RunConfig& config) {
    config.params.validate();
    const auto& exp = config.experiment;
    SyntheticSpec base = config.synthetic.value_or(SyntheticSpec{});
    std::filesystem::create_directories(config.output_dir);

    auto emit = [&](const SweepResult& result, const std::string& tag) {
        write_runs_csv(result, config.output_dir / (tag + "_runs.csv"));
        write_aggregate_csv(result, config.output_dir / (tag + "_aggregate.csv"));
    };
    auto series_of = [](const SweepResult& result, bool bare) {
        ChartSeries s;
        s.name = bare ? "bare" : "odefs";
        for (const auto& row : result.rows) {
            s.xs.push_back(row.param);
            s.ys.push_back(bare ? row.mean_auc_bare : row.mean_auc);
        }
        return s;
    };

    if (name == "sweep-m") {
        auto result = sweep_unlabeled_ratio(base, config.params, exp.ratios, exp.repeats,
                                            exp.workers);
        emit(result, "sweep_m");
        if (config.reports.plots) {
            write_line_chart(config.output_dir / "sweep_m_auc.svg", "AUC vs unlabeled ratio",
                             "m / m*", "mean AUC", {series_of(result, false)});
            ChartSeries runtime{"runtime", {}, {}};
            for (const auto& row : result.rows) {
                runtime.xs.push_back(row.param);
                runtime.ys.push_back(row.mean_runtime_s);
            }
            write_line_chart(config.output_dir / "sweep_m_runtime.svg",
                             "Runtime vs unlabeled ratio", "m / m*", "mean seconds", {runtime});
        }
    } else if (name == "noise") {
        auto result =
            noise_resilience(base, config.params, exp.fractions, exp.repeats, exp.workers);
        emit(result, "noise");
        if (config.reports.plots) {
            write_line_chart(config.output_dir / "noise_auc.svg",
                             "AUC vs relevant-feature fraction", "relevant fraction", "mean AUC",
                             {series_of(result, false), series_of(result, true)});
        }
    } else if (name == "scalability") {
        auto result_n = scalability(config.params, exp.sizes_n, exp.repeats, exp.workers);
        emit(result_n, "scalability_n");
        auto result_d = scalability(config.params, exp.sizes_d, exp.repeats, exp.workers);
        emit(result_d, "scalability_d");
        if (config.reports.plots) {
            ChartSeries rn{"runtime", {}, {}};
            for (const auto& row : result_n.rows) {
                rn.xs.push_back(row.param);
                rn.ys.push_back(row.mean_runtime_s);
            }
            write_line_chart(config.output_dir / "scalability_n.svg", "Runtime vs data size", "n",
                             "mean seconds", {rn});
            ChartSeries rd{"runtime", {}, {}};
            for (const auto& row : result_d.rows) {
                rd.xs.push_back(row.param);
                rd.ys.push_back(row.mean_runtime_s);
            }
            write_line_chart(config.output_dir / "scalability_d.svg", "Runtime vs feature size",
                             "d", "mean seconds", {rd});
        }
    } else {
        throw Error(ErrorCode::config,
                    "unknown experiment '" + name + "' (expected sweep-m, noise or scalability)");
    }
    std::cout << "experiment '" << name << "' written to " << config.output_dir.string() << "\n";
    return 0;
}

int exit_status_for(const Error& error) {
    switch (error.code()) {
        case ErrorCode::config: return 2;
        case ErrorCode::io: return 3;
        case ErrorCode::parse: return 4;
        case ErrorCode::empty_candidate_set: return 5;
        case ErrorCode::degenerate_component: return 6;
        case ErrorCode::all_components_degenerate: return 6;
        case ErrorCode::numeric: return 7;
        case ErrorCode::metric: return 8;
    }
    return 1;
}

}  // namespace odefs
