#include "odefs/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "odefs/errors.hpp"
#include "odefs/rng.hpp"

namespace odefs {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_cells(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

bool parse_double(std::string_view cell, double& value) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last && !cell.empty() && std::isfinite(value);
}

void append_double(std::string& out, double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    out.append(buf, ptr);
}

}  // namespace

void Dataset::validate() const {
    if (rows < 2) throw Error(ErrorCode::config, "dataset needs at least 2 rows, got " + std::to_string(rows));
    if (cols < 1) throw Error(ErrorCode::config, "dataset needs at least 1 feature");
    if (values.size() != rows * cols) throw Error(ErrorCode::config, "value buffer does not match rows*cols");
    if (feature_names.size() != cols) throw Error(ErrorCode::config, "feature name count does not match columns");
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorCode::config, "dataset contains a non-finite value");
    }
    if (!labels.empty()) {
        if (labels.size() != rows) throw Error(ErrorCode::config, "label count does not match rows");
        for (auto l : labels) {
            if (l != 0 && l != 1) throw Error(ErrorCode::config, "labels must be 0 or 1");
        }
    }
}

Dataset load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::parse, path.string() + ": missing header row");

    std::vector<std::string_view> cells;
    split_cells(line, cells);
    std::vector<std::string> header(cells.begin(), cells.end());
    const std::size_t total_cols = header.size();

    std::size_t label_idx = total_cols;  // sentinel: no label column
    if (label_column) {
        auto it = std::find(header.begin(), header.end(), *label_column);
        if (it == header.end()) {
            throw Error(ErrorCode::parse,
                        path.string() + ": label column '" + *label_column + "' not found in header");
        }
        label_idx = static_cast<std::size_t>(it - header.begin());
    }

    Dataset data;
    data.cols = label_column ? total_cols - 1 : total_cols;
    if (data.cols == 0) throw Error(ErrorCode::parse, path.string() + ": no feature columns");
    for (std::size_t c = 0; c < total_cols; ++c) {
        if (c != label_idx) data.feature_names.push_back(header[c]);
    }

    std::size_t row_number = 0;  // 1-based over data rows
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row_number;
        split_cells(line, cells);
        if (cells.size() != total_cols) {
            throw Error(ErrorCode::parse, path.string() + ": row " + std::to_string(row_number) +
                                              " has " + std::to_string(cells.size()) +
                                              " cells, expected " + std::to_string(total_cols));
        }
        for (std::size_t c = 0; c < total_cols; ++c) {
            double value = 0.0;
            if (!parse_double(cells[c], value)) {
                throw Error(ErrorCode::parse, path.string() + ": row " + std::to_string(row_number) +
                                                  ", column '" + header[c] + "': cannot parse '" +
                                                  std::string(cells[c]) + "' as a finite number");
            }
            if (c == label_idx) {
                if (value != 0.0 && value != 1.0) {
                    throw Error(ErrorCode::parse, path.string() + ": row " + std::to_string(row_number) +
                                                      ", label column '" + header[c] +
                                                      "': value must be 0 or 1");
                }
                data.labels.push_back(static_cast<std::uint8_t>(value));
            } else {
                data.values.push_back(value);
            }
        }
    }
    data.rows = row_number;
    data.validate();
    return data;
}

void write_csv(const Dataset& data, const std::filesystem::path& path, const std::string& label_name) {
    std::string out;
    out.reserve(data.values.size() * 12);
    for (std::size_t c = 0; c < data.cols; ++c) {
        if (c) out.push_back(',');
        out += data.feature_names[c];
    }
    if (data.has_labels()) {
        out.push_back(',');
        out += label_name;
    }
    out.push_back('\n');
    for (std::size_t i = 0; i < data.rows; ++i) {
        auto r = data.row(i);
        for (std::size_t c = 0; c < data.cols; ++c) {
            if (c) out.push_back(',');
            append_double(out, r[c]);
        }
        if (data.has_labels()) {
            out.push_back(',');
            out.push_back(data.labels[i] ? '1' : '0');
        }
        out.push_back('\n');
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::io, "cannot write " + path.string());
    f << out;
}

std::pair<Dataset, NormalizationParams> minmax_normalize(const Dataset& data) {
    data.validate();
    NormalizationParams params;
    params.min.assign(data.cols, std::numeric_limits<double>::infinity());
    params.max.assign(data.cols, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < data.rows; ++i) {
        auto r = data.row(i);
        for (std::size_t c = 0; c < data.cols; ++c) {
            params.min[c] = std::min(params.min[c], r[c]);
            params.max[c] = std::max(params.max[c], r[c]);
        }
    }
    Dataset out = data;
    for (std::size_t i = 0; i < data.rows; ++i) {
        for (std::size_t c = 0; c < data.cols; ++c) {
            double range = params.max[c] - params.min[c];
            double& v = out.values[i * data.cols + c];
            v = range > 0.0 ? (v - params.min[c]) / range : 0.0;
        }
    }
    return {std::move(out), std::move(params)};
}

std::size_t SyntheticSpec::outlier_count() const {
    return static_cast<std::size_t>(std::llround(outlier_fraction * static_cast<double>(n)));
}

void SyntheticSpec::validate() const {
    if (n < 2) throw Error(ErrorCode::config, "synthetic spec: n must be at least 2");
    if (d < 1) throw Error(ErrorCode::config, "synthetic spec: d must be at least 1");
    if (d_relevant < 1 || d_relevant > d) {
        throw Error(ErrorCode::config, "synthetic spec: d_relevant must be in [1, d]");
    }
    if (!(outlier_fraction > 0.0 && outlier_fraction < 0.5)) {
        throw Error(ErrorCode::config, "synthetic spec: outlier_fraction must be in (0, 0.5)");
    }
    if (!(stddev > 0.0)) throw Error(ErrorCode::config, "synthetic spec: std must be positive");
    std::size_t count = outlier_count();
    if (count < 1 || count >= n) {
        throw Error(ErrorCode::config, "synthetic spec: rounded outlier count " +
                                           std::to_string(count) + " must be in [1, n-1]");
    }
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t n_out = spec.outlier_count();

    Dataset data;
    data.rows = spec.n;
    data.cols = spec.d;
    data.values.resize(spec.n * spec.d);
    data.labels.assign(spec.n, 0);
    data.feature_names.reserve(spec.d);
    for (std::size_t c = 0; c < spec.d; ++c) data.feature_names.push_back("f" + std::to_string(c));

    Rng rng(spec.seed);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const bool outlier = i < n_out;
        data.labels[i] = outlier ? 1 : 0;
        double* row = data.values.data() + i * spec.d;
        for (std::size_t c = 0; c < spec.d; ++c) {
            const bool relevant = c < spec.d_relevant;
            const double mean = (relevant && outlier) ? spec.outlier_mean : spec.inlier_mean;
            row[c] = rng.normal(mean, spec.stddev);
        }
    }
    return data;
}

}  // namespace odefs
