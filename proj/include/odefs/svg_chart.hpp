#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace odefs {

struct ChartSeries {
    std::string name;
    std::vector<double> xs;
    std::vector<double> ys;
};

/// Writes a minimal standalone SVG line chart (axes, ticks, legend). Points
/// with non-finite coordinates are skipped.
void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<ChartSeries>& series);

}  // namespace odefs
