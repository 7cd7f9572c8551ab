#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "dbc/errors.hpp"
#include "dbc/mesh.hpp"

namespace dbc {

void write_mesh(std::ostream& os, const Mesh& m) {
  os << "vertices " << m.num_vertices() << " triangles " << m.num_triangles() << " bedges "
     << m.boundary_edges.size() << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& v : m.vertices) os << v.x() << ' ' << v.y() << '\n';
  for (const auto& t : m.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : m.boundary_edges)
    os << e.v0 << ' ' << e.v1 << ' ' << e.triangle << ' ' << e.segment << '\n';
}

Mesh read_mesh(std::istream& is) {
  std::string w0, w1, w2;
  std::size_t nv = 0, nt = 0, nb = 0;
  if (!(is >> w0 >> nv >> w1 >> nt >> w2 >> nb) || w0 != "vertices" || w1 != "triangles" ||
      w2 != "bedges")
    throw IOFailure("mesh header must read 'vertices N triangles T bedges B'");
  Mesh m;
  m.vertices.resize(nv);
  m.triangles.resize(nt);
  m.boundary_edges.resize(nb);
  for (auto& v : m.vertices)
    if (!(is >> v.x() >> v.y())) throw IOFailure("truncated vertex block");
  for (auto& t : m.triangles)
    if (!(is >> t[0] >> t[1] >> t[2])) throw IOFailure("truncated triangle block");
  for (auto& e : m.boundary_edges)
    if (!(is >> e.v0 >> e.v1 >> e.triangle >> e.segment)) throw IOFailure("truncated boundary block");
  if (nb == 0) throw IOFailure("mesh without boundary");

  // corners sit where the side id changes; the cycle starts at the primary corner
  std::vector<Point> corners;
  for (std::size_t i = 0; i < nb; ++i) {
    const auto& prev = m.boundary_edges[(i + nb - 1) % nb];
    const auto& cur = m.boundary_edges[i];
    if (prev.v1 != cur.v0) throw IOFailure("boundary edges do not form a cycle");
    if (prev.segment != cur.segment || i == 0) {
      corners.push_back(m.vertices[cur.v0]);
      m.corner_vertex_ids.push_back(cur.v0);
    }
  }
  m.polygon = make_polygon(corners, 0);
  double h = 0.0;
  for (const auto& t : m.triangles)
    for (int k = 0; k < 3; ++k) h = std::max(h, (m.vertices[t[k]] - m.vertices[t[(k + 1) % 3]]).norm());
  m.h = h;
  return m;
}

void write_mesh_file(const std::string& path, const Mesh& m) {
  std::ofstream os(path);
  if (!os) throw IOFailure("cannot open '" + path + "' for writing");
  write_mesh(os, m);
  if (!os) throw IOFailure("failed writing '" + path + "'");
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IOFailure("cannot open '" + path + "'");
  return read_mesh(is);
}

}  // namespace dbc
