#pragma once

#include <vector>

#include "jamloc/common.hpp"

namespace jamloc {

/// Convex hull of 2D points (x, y), counter-clockwise, no repeated endpoint.
/// Collinear inputs yield a degenerate 2-point hull.
std::vector<Vec3> convex_hull_xy(const std::vector<Vec3>& points);

/// Point-in-convex-polygon test in the xy plane. Boundary counts as inside.
bool point_in_hull_xy(const Vec3& p, const std::vector<Vec3>& hull);

}  // namespace jamloc
