#include "odefs/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>

#include "odefs/errors.hpp"
#include "odefs/metrics.hpp"
#include "odefs/parallel.hpp"
#include "odefs/rng.hpp"

namespace odefs {

namespace {

constexpr std::uint64_t kStreamData = 11;
constexpr std::uint64_t kStreamRun = 12;

double mean_of(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs, double mean) {
    double sq = 0.0;
    for (double x : xs) sq += (x - mean) * (x - mean);
    return std::sqrt(sq / static_cast<double>(xs.size()));
}

struct RunTask {
    std::size_t row = 0;
    std::size_t repeat = 0;
    SyntheticSpec spec;
    OdefsParams params;
    double param_value = 0.0;
    bool with_bare = false;
    bool with_recovery = false;
};

RunRecord execute_run(const RunTask& task) {
    SyntheticSpec spec = task.spec;
    auto [normalized, norm_params] = minmax_normalize(generate_synthetic(spec));
    (void)norm_params;

    OdefsParams params = task.params;
    params.threads = 1;  // timed runs stay single-threaded

    RunRecord record;
    record.param = task.param_value;
    record.n = spec.n;
    record.d = spec.d;
    record.repeat = task.repeat;
    record.seed = params.seed;

    const auto t0 = std::chrono::steady_clock::now();
    auto [scores, model] = run_odefs(normalized, params);
    const auto t1 = std::chrono::steady_clock::now();
    record.runtime_s = std::chrono::duration<double>(t1 - t0).count();
    record.auc_odefs = auc(scores, normalized.labels);
    if (task.with_bare) {
        // initial_scores are the bare LeSiNN scores under the same seed
        record.auc_bare = auc(model.initial_scores, normalized.labels);
    }
    if (task.with_recovery) {
        double frac_sum = 0.0;
        double count_sum = 0.0;
        for (const auto& component : model.components) {
            std::size_t relevant = 0;
            for (auto f : component.feature_set) {
                if (f < spec.d_relevant) ++relevant;
            }
            frac_sum += static_cast<double>(relevant) /
                        static_cast<double>(component.feature_set.size());
            count_sum += static_cast<double>(component.feature_set.size());
        }
        const double l = static_cast<double>(model.components.size());
        record.selected_relevant_frac = frac_sum / l;
        record.selected_count = count_sum / l;
    }
    return record;
}

SweepResult run_tasks(std::string param_name, const std::vector<RunTask>& tasks,
                      std::size_t num_rows, std::size_t workers) {
    std::vector<RunRecord> records(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());

    const int team = static_cast<int>(std::max<std::size_t>(1, workers));
    const auto total = static_cast<std::int64_t>(tasks.size());
#pragma omp parallel for schedule(dynamic) num_threads(team)
    for (std::int64_t i = 0; i < total; ++i) {
        try {
            records[i] = execute_run(tasks[i]);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    SweepResult result;
    result.param_name = std::move(param_name);
    result.runs = records;
    result.rows.resize(num_rows);
    for (std::size_t r = 0; r < num_rows; ++r) {
        std::vector<double> aucs, aucs_bare, runtimes, fracs, counts;
        SweepRow& row = result.rows[r];
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (tasks[i].row != r) continue;
            row.param = tasks[i].param_value;
            row.n = tasks[i].spec.n;
            row.d = tasks[i].spec.d;
            aucs.push_back(records[i].auc_odefs);
            runtimes.push_back(records[i].runtime_s);
            if (!std::isnan(records[i].auc_bare)) aucs_bare.push_back(records[i].auc_bare);
            if (!std::isnan(records[i].selected_relevant_frac)) {
                fracs.push_back(records[i].selected_relevant_frac);
                counts.push_back(records[i].selected_count);
            }
        }
        row.repeats = aucs.size();
        row.mean_auc = mean_of(aucs);
        row.std_auc = std_of(aucs, row.mean_auc);
        row.mean_runtime_s = mean_of(runtimes);
        if (!aucs_bare.empty()) {
            row.mean_auc_bare = mean_of(aucs_bare);
            row.std_auc_bare = std_of(aucs_bare, row.mean_auc_bare);
        }
        if (!fracs.empty()) {
            row.mean_selected_relevant_frac = mean_of(fracs);
            row.mean_selected_count = mean_of(counts);
        }
    }
    return result;
}

}  // namespace

SweepResult sweep_unlabeled_ratio(const SyntheticSpec& spec, const OdefsParams& params,
                                  const std::vector<std::size_t>& ratios, std::size_t repeats,
                                  std::size_t workers) {
    if (ratios.empty()) throw Error(ErrorCode::config, "sweep: ratios must not be empty");
    if (repeats < 1) throw Error(ErrorCode::config, "sweep: repeats must be >= 1");

    std::vector<RunTask> tasks;
    for (std::size_t r = 0; r < ratios.size(); ++r) {
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            RunTask task;
            task.row = r;
            task.repeat = rep;
            task.param_value = static_cast<double>(ratios[r]);
            task.spec = spec;
            task.spec.seed = mix_seed(mix_seed(mix_seed(params.seed, kStreamData), r), rep);
            task.params = params;
            task.params.unlabeled_ratio = ratios[r];
            task.params.seed = mix_seed(mix_seed(mix_seed(params.seed, kStreamRun), r), rep);
            tasks.push_back(task);
        }
    }
    return run_tasks("unlabeled_ratio", tasks, ratios.size(), workers);
}

SweepResult noise_resilience(const SyntheticSpec& base_spec, const OdefsParams& params,
                             const std::vector<double>& relevant_fractions, std::size_t repeats,
                             std::size_t workers) {
    if (relevant_fractions.empty()) {
        throw Error(ErrorCode::config, "noise: fractions must not be empty");
    }
    for (double f : relevant_fractions) {
        if (!(f > 0.0 && f <= 1.0)) {
            throw Error(ErrorCode::config, "noise: fractions must lie in (0, 1]");
        }
    }
    std::vector<RunTask> tasks;
    for (std::size_t r = 0; r < relevant_fractions.size(); ++r) {
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            RunTask task;
            task.row = r;
            task.repeat = rep;
            task.param_value = relevant_fractions[r];
            task.spec = base_spec;
            task.spec.d_relevant = std::max<std::size_t>(
                1, static_cast<std::size_t>(
                       std::llround(relevant_fractions[r] * static_cast<double>(base_spec.d))));
            task.spec.seed = mix_seed(mix_seed(mix_seed(params.seed, kStreamData), r), rep);
            task.params = params;
            task.params.seed = mix_seed(mix_seed(mix_seed(params.seed, kStreamRun), r), rep);
            task.with_bare = true;
            task.with_recovery = true;
            tasks.push_back(task);
        }
    }
    return run_tasks("relevant_fraction", tasks, relevant_fractions.size(), workers);
}

SweepResult scalability(const OdefsParams& params,
                        const std::vector<std::pair<std::size_t, std::size_t>>& sizes,
                        std::size_t repeats, std::size_t workers) {
    if (sizes.empty()) throw Error(ErrorCode::config, "scalability: sizes must not be empty");

    bool n_varies = false;
    bool d_varies = false;
    for (const auto& [n, d] : sizes) {
        if (n != sizes.front().first) n_varies = true;
        if (d != sizes.front().second) d_varies = true;
    }
    std::vector<RunTask> tasks;
    for (std::size_t r = 0; r < sizes.size(); ++r) {
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            RunTask task;
            task.row = r;
            task.repeat = rep;
            task.spec.n = sizes[r].first;
            task.spec.d = sizes[r].second;
            task.spec.d_relevant = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(task.spec.d))));
            task.spec.outlier_fraction = 0.02;
            task.spec.seed = mix_seed(mix_seed(mix_seed(params.seed, kStreamData), r), rep);
            task.param_value = n_varies && !d_varies ? static_cast<double>(task.spec.n)
                                                     : static_cast<double>(task.spec.d);
            task.params = params;
            task.params.seed = mix_seed(mix_seed(mix_seed(params.seed, kStreamRun), r), rep);
            tasks.push_back(task);
        }
    }
    const char* name = n_varies && !d_varies ? "n" : (!n_varies && d_varies ? "d" : "size_index");
    return run_tasks(name, tasks, sizes.size(), workers);
}

namespace {

void append_cell(std::string& out, double value) {
    if (std::isnan(value)) return;  // blank cell
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    out.append(buf, ptr);
}

}  // namespace

void write_runs_csv(const SweepResult& result, const std::filesystem::path& path) {
    std::string out = result.param_name +
                      ",n,d,repeat,seed,auc,auc_bare,runtime_s,"
                      "selected_relevant_frac,selected_count\n";
    for (const auto& run : result.runs) {
        append_cell(out, run.param);
        out += "," + std::to_string(run.n) + "," + std::to_string(run.d) + "," +
               std::to_string(run.repeat) + "," + std::to_string(run.seed) + ",";
        append_cell(out, run.auc_odefs);
        out.push_back(',');
        append_cell(out, run.auc_bare);
        out.push_back(',');
        append_cell(out, run.runtime_s);
        out.push_back(',');
        append_cell(out, run.selected_relevant_frac);
        out.push_back(',');
        append_cell(out, run.selected_count);
        out.push_back('\n');
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::io, "cannot write " + path.string());
    f << out;
}

void write_aggregate_csv(const SweepResult& result, const std::filesystem::path& path) {
    std::string out = result.param_name +
                      ",n,d,repeats,mean_auc,std_auc,mean_auc_bare,std_auc_bare,"
                      "mean_runtime_s,mean_selected_relevant_frac,mean_selected_count\n";
    for (const auto& row : result.rows) {
        append_cell(out, row.param);
        out += "," + std::to_string(row.n) + "," + std::to_string(row.d) + "," +
               std::to_string(row.repeats) + ",";
        append_cell(out, row.mean_auc);
        out.push_back(',');
        append_cell(out, row.std_auc);
        out.push_back(',');
        append_cell(out, row.mean_auc_bare);
        out.push_back(',');
        append_cell(out, row.std_auc_bare);
        out.push_back(',');
        append_cell(out, row.mean_runtime_s);
        out.push_back(',');
        append_cell(out, row.mean_selected_relevant_frac);
        out.push_back(',');
        append_cell(out, row.mean_selected_count);
        out.push_back('\n');
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::io, "cannot write " + path.string());
    f << out;
}

}  // namespace odefs
