#pragma once

#include <optional>
#include <string>
#include <vector>

namespace metacon {

// Standalone SVG heatmap in the paper-figure orientation: rows are
// meta-train spaces, columns are meta-test spaces. Undefined cells render
// gray with "n/a".
void write_heatmap_svg(const std::string& path, const std::string& title,
                       const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels,
                       const std::vector<std::vector<std::optional<double>>>& values);

}  // namespace metacon
