#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace htc {

using Point3 = Eigen::Vector3d;

/// Orthonormal frame of a planar polygon: origin at the first vertex, `u` along
/// the first edge, `normal` from Newell's method, `v = normal x u`.
struct PlaneFrame {
  Point3 origin = Point3::Zero();
  Point3 u = Point3::UnitX();
  Point3 v = Point3::UnitY();
  Point3 normal = Point3::UnitZ();

  static PlaneFrame of_polygon(std::span<const Point3> polygon);

  double signed_distance(const Point3& p) const { return normal.dot(p - origin); }
  Eigen::Vector2d to_local(const Point3& p) const {
    const Point3 d = p - origin;
    return {u.dot(d), v.dot(d)};
  }
};

double distance_to_segment(const Point3& p, const Point3& a, const Point3& b);

/// Distance from `p` to the closed polyline through `polygon` (last vertex joins the first).
double distance_to_polygon_boundary(const Point3& p, std::span<const Point3> polygon);

/// Point-in-polygon in the polygon's own plane; points within `tol` of an edge count as inside.
bool polygon_contains(std::span<const Point3> polygon, const PlaneFrame& frame, const Point3& p, double tol);

/// True when no two non-adjacent edges intersect.
bool polygon_is_simple(std::span<const Point3> polygon, const PlaneFrame& frame);

}  // namespace htc
