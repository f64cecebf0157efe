#pragma once

#include "sgwot/geometry.hpp"
#include "sgwot/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace sgwot {

/// Two point clouds side by side with line segments for coupling entries
/// at or above threshold * max(P). Coordinates beyond 2D are projected to
/// the first two axes.
void write_matching_svg(const std::string& path, const PointCloud& source,
                        const PointCloud& target, const Matrix& coupling, double threshold);

/// Scatter plot of (cover size, transported mass).
void write_cover_scatter_svg(const std::string& path,
                             const std::vector<std::pair<std::size_t, double>>& size_mass);

}  // namespace sgwot
