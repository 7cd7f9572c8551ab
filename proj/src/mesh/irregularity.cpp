#include <algorithm>
#include <cmath>

#include "dbc/mesh.hpp"
#include "mesh_internal.hpp"

namespace dbc {

namespace {

int opposite_vertex(const std::array<int, 3>& tri, int a, int b) {
  for (int v : tri)
    if (v != a && v != b) return v;
  return -1;
}

// Edge lengths of a triangle traversed clockwise, starting with the edge (v0, v1).
std::array<double, 3> clockwise_lengths(const Mesh& m, const BoundaryEdge& e) {
  const int c = opposite_vertex(m.triangles[e.triangle], e.v0, e.v1);
  const Point& p = m.vertices[e.v0];
  const Point& q = m.vertices[e.v1];
  const Point& r = m.vertices[c];
  return {(q - p).norm(), (p - r).norm(), (r - q).norm()};
}

}  // namespace

IrregularityReport check_h2_irregular(const Mesh& m) {
  IrregularityReport rep;
  const double diam = m.polygon.diameter();
  const double h2 = m.h * m.h;
  rep.threshold = 4.0 / diam;
  const double tol = rep.threshold * h2;

  const auto table = detail::build_edges(m.triangles);
  std::vector<char> exempt_triangle(m.triangles.size(), 0);
  for (const auto& e : table.edges) {
    if (e.t1 < 0) continue;
    ++rep.interior_edges;
    const int a = e.v0, b = e.v1;
    const int c = opposite_vertex(m.triangles[e.t0], a, b);
    const int d = opposite_vertex(m.triangles[e.t1], a, b);
    const auto len = [&](int i, int j) { return (m.vertices[i] - m.vertices[j]).norm(); };
    // quadrilateral a, c, b, d: opposite pairs (ac, bd) and (cb, da)
    const double disc = std::max(std::abs(len(a, c) - len(b, d)), std::abs(len(c, b) - len(d, a)));
    rep.max_interior_discrepancy = std::max(rep.max_interior_discrepancy, disc);
    if (disc > tol) {
      ++rep.exempt_edges;
      exempt_triangle[e.t0] = exempt_triangle[e.t1] = 1;
    }
  }
  double exempt_area = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t)
    if (exempt_triangle[t]) exempt_area += std::abs(m.triangle_area(t));
  rep.discrepancy_ratio = rep.max_interior_discrepancy / h2;
  rep.e2_area_fraction = exempt_area / m.total_area();

  // boundary vertices other than the polygon corners
  std::vector<char> is_corner(m.vertices.size(), 0);
  for (int v : m.corner_vertex_ids) is_corner[v] = 1;
  const int nb = m.num_boundary_vertices();
  for (int i = 0; i < nb; ++i) {
    const BoundaryEdge& incoming = m.boundary_edges[(i + nb - 1) % nb];
    const BoundaryEdge& outgoing = m.boundary_edges[i];
    if (is_corner[outgoing.v0]) continue;
    const Point t0 = (m.vertices[incoming.v1] - m.vertices[incoming.v0]).normalized();
    const Point t1 = (m.vertices[outgoing.v1] - m.vertices[outgoing.v0]).normalized();
    bool ok = (t0 - t1).norm() <= m.h;
    const auto l0 = clockwise_lengths(m, incoming);
    const auto l1 = clockwise_lengths(m, outgoing);
    for (int k = 0; k < 3; ++k) ok = ok && std::abs(l0[k] - l1[k]) <= tol;
    if (!ok) ++rep.boundary_vertex_violations;
  }

  rep.verdict = rep.e2_area_fraction <= 4.0 * h2 / (diam * diam) &&
                rep.boundary_vertex_violations <= m.polygon.size();
  return rep;
}

}  // namespace dbc
