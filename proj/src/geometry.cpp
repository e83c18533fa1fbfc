#include "htcflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "htcflow/error.hpp"

namespace htc {

PlaneFrame PlaneFrame::of_polygon(std::span<const Point3> polygon) {
  if (polygon.size() < 3) {
    throw Error(Errc::invalid_argument, "boundary polygon needs at least 3 vertices");
  }
  Point3 normal = Point3::Zero();
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Point3& a = polygon[i];
    const Point3& b = polygon[(i + 1) % polygon.size()];
    normal.x() += (a.y() - b.y()) * (a.z() + b.z());
    normal.y() += (a.z() - b.z()) * (a.x() + b.x());
    normal.z() += (a.x() - b.x()) * (a.y() + b.y());
  }
  const double area2 = normal.norm();
  if (!(area2 > 0.0)) {
    throw Error(Errc::invalid_argument, "boundary polygon is degenerate (zero area)");
  }
  PlaneFrame frame;
  frame.origin = polygon[0];
  frame.normal = normal / area2;
  Point3 edge = polygon[1] - polygon[0];
  edge -= frame.normal * frame.normal.dot(edge);
  if (!(edge.norm() > 0.0)) {
    throw Error(Errc::invalid_argument, "boundary polygon has a zero-length first edge");
  }
  frame.u = edge.normalized();
  frame.v = frame.normal.cross(frame.u);
  return frame;
}

double distance_to_segment(const Point3& p, const Point3& a, const Point3& b) {
  const Point3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

double distance_to_polygon_boundary(const Point3& p, std::span<const Point3> polygon) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    best = std::min(best, distance_to_segment(p, polygon[i], polygon[(i + 1) % polygon.size()]));
  }
  return best;
}

bool polygon_contains(std::span<const Point3> polygon, const PlaneFrame& frame, const Point3& p, double tol) {
  if (distance_to_polygon_boundary(p, polygon) <= tol) return true;
  const Eigen::Vector2d q = frame.to_local(p);
  bool inside = false;
  for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
    const Eigen::Vector2d a = frame.to_local(polygon[i]);
    const Eigen::Vector2d b = frame.to_local(polygon[j]);
    if ((a.y() > q.y()) != (b.y() > q.y())) {
      const double x_cross = a.x() + (q.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (q.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

namespace {

double orient(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool on_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y() &&
         p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2, const Eigen::Vector2d& q1,
                        const Eigen::Vector2d& q2) {
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

}  // namespace

bool polygon_is_simple(std::span<const Point3> polygon, const PlaneFrame& frame) {
  const std::size_t n = polygon.size();
  std::vector<Eigen::Vector2d> local;
  local.reserve(n);
  for (const auto& p : polygon) local.push_back(frame.to_local(p));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(local[i], local[(i + 1) % n], local[j], local[(j + 1) % n])) return false;
    }
  }
  return true;
}

}  // namespace htc
