#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dbc/errors.hpp"
#include "dbc/mesh.hpp"

namespace dbc {

namespace {

constexpr double kPi = std::numbers::pi;

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

// counterclockwise angle from u to v in [0, 2pi)
double ccw_angle(const Point& u, const Point& v) {
  double t = std::atan2(cross(u, v), u.dot(v));
  if (t < 0.0) t += 2.0 * kPi;
  return t;
}

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-13 ? r : v;
}

}  // namespace

const Point& PolygonSpec::corner(int j) const {
  const int n = size();
  return corners[((j % n) + n) % n];
}

Point PolygonSpec::side_direction(int j) const {
  return (corner(j + 1) - corner(j)).normalized();
}

Point PolygonSpec::outward_normal(int side) const {
  const Point t = side_direction(side);
  return {t.y(), -t.x()};
}

double PolygonSpec::side_length(int side) const { return (corner(side + 1) - corner(side)).norm(); }

double PolygonSpec::perimeter() const {
  double p = 0.0;
  for (int j = 0; j < size(); ++j) p += side_length(j);
  return p;
}

double PolygonSpec::area() const {
  double a = 0.0;
  for (int j = 0; j < size(); ++j) a += cross(corner(j), corner(j + 1));
  return 0.5 * a;
}

double PolygonSpec::diameter() const {
  double d = 0.0;
  for (const auto& p : corners)
    for (const auto& q : corners) d = std::max(d, (p - q).norm());
  return d;
}

bool PolygonSpec::contains(const Point& x, double tol) const {
  // on-boundary counts as inside
  for (int j = 0; j < size(); ++j) {
    const Point a = corner(j), b = corner(j + 1);
    const Point ab = b - a;
    const double len = ab.norm();
    const double s = (x - a).dot(ab) / (len * len);
    if (s >= -tol && s <= 1.0 + tol && std::abs(cross(ab, x - a)) / len <= tol) return true;
  }
  // winding number
  double wind = 0.0;
  for (int j = 0; j < size(); ++j) {
    const Point a = corner(j) - x, b = corner(j + 1) - x;
    wind += std::atan2(cross(a, b), a.dot(b));
  }
  return std::abs(wind) > kPi;
}

PolygonSpec make_polygon(std::vector<Point> corners, int primary_corner_index) {
  const int n = static_cast<int>(corners.size());
  if (n < 3) throw TriangulationFailure("polygon needs at least three corners");
  for (auto& c : corners) c = Point(snap(c.x()), snap(c.y()));
  for (int j = 0; j < n; ++j) {
    if ((corners[(j + 1) % n] - corners[j]).norm() < 1e-12) {
      std::ostringstream msg;
      msg << "polygon corners " << j << " and " << (j + 1) % n << " coincide";
      throw TriangulationFailure(msg.str());
    }
  }
  PolygonSpec spec;
  spec.corners = std::move(corners);
  spec.primary_corner_index = primary_corner_index;
  spec.angles.resize(n);
  double turning = 0.0;
  for (int j = 0; j < n; ++j) {
    const Point next = spec.corner(j + 1) - spec.corner(j);
    const Point prev = spec.corner(j - 1) - spec.corner(j);
    spec.angles[j] = ccw_angle(next, prev);
    if (spec.angles[j] < 1e-12) throw TriangulationFailure("polygon has a zero angle");
    turning += kPi - spec.angles[j];
  }
  if (std::abs(turning - 2.0 * kPi) > 1e-9 || spec.area() <= 0.0)
    throw TriangulationFailure("polygon corners are not a simple counterclockwise cycle");
  return spec;
}

PolygonSpec build_sector_domain(double omega1) {
  if (!(omega1 >= kPi / 3.0 - 1e-14) || !(omega1 < 2.0 * kPi)) {
    std::ostringstream msg;
    msg << "sector angle " << omega1 << " outside [pi/3, 2pi)";
    throw OutOfRange(msg.str());
  }
  if (omega1 <= kPi / 2.0 + 1e-14) {
    return make_polygon({Point(0, 0), Point(1, 0), Point(std::cos(omega1), std::sin(omega1))});
  }
  // walk the square boundary counterclockwise from (1,0) up to the exit point of the ray
  std::vector<Point> corners{Point(0, 0), Point(1, 0)};
  const std::array<std::pair<double, Point>, 4> square{{{kPi / 4, Point(1, 1)},
                                                        {3 * kPi / 4, Point(-1, 1)},
                                                        {5 * kPi / 4, Point(-1, -1)},
                                                        {7 * kPi / 4, Point(1, -1)}}};
  const Point dir(std::cos(omega1), std::sin(omega1));
  const Point exit = dir / std::max(std::abs(dir.x()), std::abs(dir.y()));
  for (const auto& [angle, p] : square) {
    if (angle < omega1 - 1e-12) corners.push_back(p);
  }
  if ((corners.back() - exit).norm() > 1e-12) corners.push_back(exit);
  return make_polygon(std::move(corners));
}

PolarCoordinates local_polar(const PolygonSpec& polygon, int corner, const Point& x) {
  const Point d = x - polygon.corner(corner);
  const double r = d.norm();
  if (r == 0.0) return {0.0, 0.0};
  double theta = ccw_angle(polygon.side_direction(corner), d);
  const double omega = polygon.angles[((corner % polygon.size()) + polygon.size()) % polygon.size()];
  // points on Gamma_j may come out just below 2pi
  if (theta > omega && 2.0 * kPi - theta < 1e-9) theta = 0.0;
  return {r, theta};
}

PolarCoordinates local_polar(const Mesh& m, int corner, const Point& x) {
  return local_polar(m.polygon, corner, x);
}

std::string to_string(MeshFamilyKind kind) {
  return kind == MeshFamilyKind::Superconvergent ? "superconvergent" : "generic";
}

MeshFamilyKind family_kind_from_string(const std::string& name) {
  if (name == "superconvergent") return MeshFamilyKind::Superconvergent;
  if (name == "generic") return MeshFamilyKind::Generic;
  throw ParseError("unknown mesh family '" + name + "' (expected superconvergent|generic)");
}

}  // namespace dbc
