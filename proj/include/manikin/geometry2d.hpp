#pragma once

#include <algorithm>
#include <vector>

#include "manikin/geometry.hpp"

namespace manikin {

/// Convex hull (Andrew's monotone chain), counter-clockwise, no repeated
/// endpoint. Collinear inputs degenerate to a segment or point.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return a == b; }),
            pts.end());
  const size_t n = pts.size();
  if (n <= 2) return pts;
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vec2> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

inline bool point_in_convex_polygon(const Vec2& p, const std::vector<Vec2>& hull) {
  if (hull.size() < 3) return false;
  for (size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    const double c = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    if (c < 0.0) return false;  // hull is CCW
  }
  return true;
}

/// Negative inside, positive outside, magnitude = distance to the boundary.
inline double signed_distance(const Vec2& p, const std::vector<Vec2>& hull) {
  if (hull.empty()) return std::numeric_limits<double>::infinity();
  if (hull.size() == 1) return (p - hull[0]).norm();
  double d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < hull.size(); ++i)
    d = std::min(d, point_segment_distance(p, hull[i], hull[(i + 1) % hull.size()]));
  return point_in_convex_polygon(p, hull) ? -d : d;
}

/// Area centroid; falls back to the vertex mean for degenerate polygons.
inline Vec2 polygon_centroid(const std::vector<Vec2>& hull) {
  if (hull.empty()) return Vec2::Zero();
  if (hull.size() < 3) {
    Vec2 mean = Vec2::Zero();
    for (const Vec2& v : hull) mean += v;
    return mean / static_cast<double>(hull.size());
  }
  double area2 = 0.0;
  Vec2 c = Vec2::Zero();
  for (size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    const double w = a.x() * b.y() - b.x() * a.y();
    area2 += w;
    c += w * (a + b);
  }
  if (std::abs(area2) < 1e-12) {
    Vec2 mean = Vec2::Zero();
    for (const Vec2& v : hull) mean += v;
    return mean / static_cast<double>(hull.size());
  }
  return c / (3.0 * area2);
}

inline double segment_circle_distance(const Vec2& a, const Vec2& b, const Vec2& c) {
  return point_segment_distance(c, a, b);
}

}  // namespace manikin
