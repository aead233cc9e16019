#include "jamloc/geometry.hpp"

#include <algorithm>

namespace jamloc {

namespace {
double cross_xy(const Vec3& o, const Vec3& a, const Vec3& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}
}  // namespace

std::vector<Vec3> convex_hull_xy(const std::vector<Vec3>& points) {
  std::vector<Vec3> pts = points;
  std::sort(pts.begin(), pts.end(), [](const Vec3& a, const Vec3& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec3& a, const Vec3& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  const size_t n = pts.size();
  if (n < 3) return pts;

  std::vector<Vec3> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && cross_xy(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t && cross_xy(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool point_in_hull_xy(const Vec3& p, const std::vector<Vec3>& hull) {
  const size_t n = hull.size();
  if (n == 0) return false;
  if (n == 1) return p.x == hull[0].x && p.y == hull[0].y;
  if (n == 2) {
    // Degenerate segment: inside means on the segment.
    const double c = cross_xy(hull[0], hull[1], p);
    if (std::abs(c) > 1e-9) return false;
    const double t = (p - hull[0]).dot(hull[1] - hull[0]);
    const double len2 = (hull[1] - hull[0]).dot(hull[1] - hull[0]);
    return t >= 0.0 && t <= len2;
  }
  for (size_t i = 0; i < n; ++i) {
    const Vec3& a = hull[i];
    const Vec3& b = hull[(i + 1) % n];
    if (cross_xy(a, b, p) < 0) return false;
  }
  return true;
}

}  // namespace jamloc
