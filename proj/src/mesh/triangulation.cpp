#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "dbc/errors.hpp"
#include "dbc/mesh.hpp"
#include "mesh_internal.hpp"

namespace dbc {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * cross(b - a, c - a);
}

bool on_side(const PolygonSpec& poly, int side, const Point& x, double tol) {
  const Point a = poly.corner(side), b = poly.corner(side + 1);
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = (x - a).dot(ab) / len2;
  if (s < -tol || s > 1.0 + tol) return false;
  return std::abs(cross(ab, x - a)) / std::sqrt(len2) <= tol * std::sqrt(len2);
}

// Structured mesh over unit lattice cells, every cell cut along the same diagonal.
bool try_lattice(const PolygonSpec& spec, std::vector<Point>& vertices,
                 std::vector<std::array<int, 3>>& triangles) {
  for (const auto& c : spec.corners) {
    if (c.x() != std::round(c.x()) || c.y() != std::round(c.y())) return false;
  }
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& c : spec.corners) {
    xmin = std::min(xmin, c.x());
    xmax = std::max(xmax, c.x());
    ymin = std::min(ymin, c.y());
    ymax = std::max(ymax, c.y());
  }
  std::map<std::pair<int, int>, int> index;
  auto vertex = [&](int i, int j) {
    auto [it, inserted] = index.try_emplace({i, j}, static_cast<int>(vertices.size()));
    if (inserted) vertices.emplace_back(i, j);
    return it->second;
  };
  double covered = 0.0;
  for (int j = static_cast<int>(ymin); j < static_cast<int>(ymax); ++j) {
    for (int i = static_cast<int>(xmin); i < static_cast<int>(xmax); ++i) {
      if (!spec.contains(Point(i + 0.5, j + 0.5))) continue;
      const int v00 = vertex(i, j), v10 = vertex(i + 1, j), v11 = vertex(i + 1, j + 1),
                v01 = vertex(i, j + 1);
      triangles.push_back({v00, v10, v11});
      triangles.push_back({v00, v11, v01});
      covered += 1.0;
    }
  }
  if (std::abs(covered - spec.area()) > 1e-12) {
    vertices.clear();
    triangles.clear();
    return false;
  }
  return true;
}

// Fan from the primary corner; sides longer than one are split.
void fan(const PolygonSpec& spec, std::vector<Point>& vertices,
         std::vector<std::array<int, 3>>& triangles) {
  const int n = spec.size();
  const int p = spec.primary_corner_index;
  vertices.push_back(spec.corner(p));
  for (int k = 1; k < n; ++k) {
    const Point a = spec.corner(p + k);
    if (k == n - 1) {
      vertices.push_back(a);
      break;
    }
    const Point b = spec.corner(p + k + 1);
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() - 1e-12)));
    for (int s = 0; s < pieces; ++s) vertices.push_back(a + (b - a) * (double(s) / pieces));
  }
  for (int k = 1; k + 1 < static_cast<int>(vertices.size()); ++k) triangles.push_back({0, k, k + 1});
}

}  // namespace

double Mesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  return signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < num_triangles(); ++t) a += triangle_area(t);
  return a;
}

double Mesh::boundary_length() const {
  double len = 0.0;
  for (const auto& e : boundary_edges) len += (vertices[e.v1] - vertices[e.v0]).norm();
  return len;
}

double Mesh::shape_constant() const {
  double worst = 0.0;
  for (int t = 0; t < num_triangles(); ++t) worst = std::max(worst, detail::triangle_shape(*this, t));
  return worst;
}

namespace detail {

double triangle_shape(const Mesh& m, int t) {
  const auto& tri = m.triangles[t];
  const double a = (m.vertices[tri[1]] - m.vertices[tri[2]]).norm();
  const double b = (m.vertices[tri[2]] - m.vertices[tri[0]]).norm();
  const double c = (m.vertices[tri[0]] - m.vertices[tri[1]]).norm();
  const double area = std::abs(m.triangle_area(t));
  const double circum = a * b * c / (4.0 * area);
  const double in = 2.0 * area / (a + b + c);
  return circum / in;
}

EdgeTable build_edges(const std::vector<std::array<int, 3>>& triangles) {
  std::vector<std::tuple<int, int, int, int>> half;  // (min, max, triangle, local edge)
  half.reserve(3 * triangles.size());
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = triangles[t][k], b = triangles[t][(k + 1) % 3];
      half.emplace_back(std::min(a, b), std::max(a, b), t, k);
    }
  }
  std::sort(half.begin(), half.end());
  EdgeTable table;
  table.triangle_edges.assign(triangles.size(), {-1, -1, -1});
  for (std::size_t i = 0; i < half.size();) {
    std::size_t j = i;
    EdgeTable::Edge e;
    e.v0 = std::get<0>(half[i]);
    e.v1 = std::get<1>(half[i]);
    while (j < half.size() && std::get<0>(half[j]) == e.v0 && std::get<1>(half[j]) == e.v1) ++j;
    if (j - i > 2) throw TriangulationFailure("edge shared by more than two triangles");
    const int id = static_cast<int>(table.edges.size());
    for (std::size_t k = i; k < j; ++k) {
      const int t = std::get<2>(half[k]);
      table.triangle_edges[t][std::get<3>(half[k])] = id;
      (k == i ? e.t0 : e.t1) = t;
    }
    table.edges.push_back(e);
    i = j;
  }
  return table;
}

std::vector<std::vector<int>> vertex_triangles(const Mesh& m) {
  std::vector<std::vector<int>> adj(m.vertices.size());
  for (int t = 0; t < m.num_triangles(); ++t)
    for (int v : m.triangles[t]) adj[v].push_back(t);
  return adj;
}

double max_edge_length(const Mesh& m) {
  double h = 0.0;
  for (const auto& tri : m.triangles)
    for (int k = 0; k < 3; ++k)
      h = std::max(h, (m.vertices[tri[k]] - m.vertices[tri[(k + 1) % 3]]).norm());
  return h;
}

}  // namespace detail

Mesh make_mesh(PolygonSpec polygon, std::vector<Point> vertices,
               std::vector<std::array<int, 3>> triangles, int level) {
  Mesh m;
  m.polygon = std::move(polygon);
  m.vertices = std::move(vertices);
  m.triangles = std::move(triangles);
  m.level = level;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const double a = m.triangle_area(t);
    if (std::abs(a) < 1e-300 || !std::isfinite(a)) throw TriangulationFailure("degenerate triangle");
    if (a < 0.0) std::swap(m.triangles[t][1], m.triangles[t][2]);
  }
  const auto table = detail::build_edges(m.triangles);

  // boundary edges keep the orientation of their triangle
  std::vector<BoundaryEdge> loose;
  for (const auto& e : table.edges) {
    if (e.t1 >= 0) continue;
    const auto& tri = m.triangles[e.t0];
    BoundaryEdge be;
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      if (std::min(a, b) == e.v0 && std::max(a, b) == e.v1) {
        be.v0 = a;
        be.v1 = b;
      }
    }
    be.triangle = e.t0;
    loose.push_back(be);
  }

  const double tol = 1e-10;
  const double scale = m.polygon.diameter();
  m.corner_vertex_ids.assign(m.polygon.size(), -1);
  for (const auto& be : loose) {
    for (int j = 0; j < m.polygon.size(); ++j) {
      if ((m.vertices[be.v0] - m.polygon.corner(j)).norm() <= tol * scale) m.corner_vertex_ids[j] = be.v0;
    }
  }
  for (int j = 0; j < m.polygon.size(); ++j) {
    if (m.corner_vertex_ids[j] < 0) {
      std::ostringstream msg;
      msg << "polygon corner " << j << " is not a boundary vertex of the mesh";
      throw TriangulationFailure(msg.str());
    }
  }

  std::vector<int> next(m.vertices.size(), -1);
  for (int i = 0; i < static_cast<int>(loose.size()); ++i) {
    if (next[loose[i].v0] >= 0) throw TriangulationFailure("boundary is not a simple cycle");
    next[loose[i].v0] = i;
  }
  const int start = m.corner_vertex_ids[m.polygon.primary_corner_index];
  int v = start;
  int side = m.polygon.primary_corner_index;
  do {
    const int i = next[v];
    if (i < 0) throw TriangulationFailure("boundary cycle is open");
    BoundaryEdge be = loose[i];
    // advance to the side containing this edge; sides are visited in order
    for (int tries = 0; tries < m.polygon.size(); ++tries) {
      if (on_side(m.polygon, side, m.vertices[be.v0], tol) &&
          on_side(m.polygon, side, m.vertices[be.v1], tol))
        break;
      side = (side + 1) % m.polygon.size();
    }
    if (!on_side(m.polygon, side, m.vertices[be.v1], tol))
      throw TriangulationFailure("boundary edge does not lie on the polygon");
    be.segment = side;
    m.boundary_edges.push_back(be);
    v = be.v1;
  } while (v != start && m.boundary_edges.size() <= loose.size());
  if (m.boundary_edges.size() != loose.size())
    throw TriangulationFailure("boundary edges do not form a single closed cycle");
  m.h = detail::max_edge_length(m);
  return m;
}

Mesh initial_triangulation(const PolygonSpec& spec) {
  for (int j = 0; j < spec.size(); ++j) {
    if (spec.side_length(j) < 1e-12) throw TriangulationFailure("degenerate polygon: coincident corners");
  }
  if (spec.area() <= 0.0) throw TriangulationFailure("degenerate polygon: nonpositive area");
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  if (spec.size() == 3) {
    vertices = spec.corners;
    triangles.push_back({0, 1, 2});
  } else if (!try_lattice(spec, vertices, triangles)) {
    fan(spec, vertices, triangles);
  }
  for (const auto& tri : triangles) {
    if (signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) <= 1e-14)
      throw TriangulationFailure("fan triangulation from the primary corner is not valid");
  }
  return make_mesh(spec, std::move(vertices), std::move(triangles), 0);
}

Mesh refine_regular(const Mesh& m) {
  const auto table = detail::build_edges(m.triangles);
  const int nv = m.num_vertices();
  Mesh r;
  r.polygon = m.polygon;
  r.level = m.level + 1;
  r.vertices = m.vertices;
  r.vertices.reserve(nv + table.edges.size());
  for (const auto& e : table.edges) r.vertices.push_back(0.5 * (m.vertices[e.v0] + m.vertices[e.v1]));
  r.triangles.reserve(4 * m.triangles.size());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto [a, b, c] = m.triangles[t];
    const int m0 = nv + table.triangle_edges[t][0];
    const int m1 = nv + table.triangle_edges[t][1];
    const int m2 = nv + table.triangle_edges[t][2];
    r.triangles.push_back({a, m0, m2});
    r.triangles.push_back({m0, b, m1});
    r.triangles.push_back({m2, m1, c});
    r.triangles.push_back({m0, m1, m2});
  }
  // children holding the first and second half of local edge k
  static constexpr std::array<std::array<int, 2>, 3> kHalves{{{0, 1}, {1, 2}, {2, 0}}};
  r.boundary_edges.reserve(2 * m.boundary_edges.size());
  for (const auto& be : m.boundary_edges) {
    const auto& tri = m.triangles[be.triangle];
    int k = 0;
    while (tri[k] != be.v0) ++k;
    const int mid = nv + table.triangle_edges[be.triangle][k];
    r.boundary_edges.push_back({be.v0, mid, 4 * be.triangle + kHalves[k][0], be.segment});
    r.boundary_edges.push_back({mid, be.v1, 4 * be.triangle + kHalves[k][1], be.segment});
  }
  r.corner_vertex_ids = m.corner_vertex_ids;
  r.h = 0.5 * m.h;
  return r;
}

}  // namespace dbc
