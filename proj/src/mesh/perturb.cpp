#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dbc/errors.hpp"
#include "dbc/mesh.hpp"
#include "mesh_internal.hpp"

namespace dbc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// uniform in [0,1), a pure function of its arguments
double hash_uniform(std::uint64_t seed, std::uint64_t vertex, std::uint64_t stream) {
  const std::uint64_t h = splitmix64(splitmix64(seed ^ splitmix64(vertex)) + stream);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// A moved vertex must keep its triangles positive and not much worse shaped than before.
constexpr double kShapeGrowth = 1.8;

bool incident_valid(const Mesh& m, const std::vector<int>& tris, const std::vector<double>& shape0) {
  for (int t : tris) {
    if (!(m.triangle_area(t) > 0.0)) return false;
    if (detail::triangle_shape(m, t) > kShapeGrowth * shape0[t]) return false;
  }
  return true;
}

}  // namespace

Mesh perturb_interior(const Mesh& m, double kappa, std::uint64_t seed, PerturbationStats* stats) {
  if (!(kappa >= 0.0 && kappa <= 0.3)) {
    std::ostringstream msg;
    msg << "perturbation amplitude " << kappa << " outside [0, 0.3]";
    throw PreconditionError(msg.str());
  }
  Mesh out = m;
  PerturbationStats local;
  if (kappa == 0.0) {
    if (stats) *stats = local;
    return out;
  }
  std::vector<char> on_boundary(m.vertices.size(), 0);
  for (const auto& e : m.boundary_edges) on_boundary[e.v0] = on_boundary[e.v1] = 1;
  const auto adj = detail::vertex_triangles(m);
  std::vector<double> shape0(m.triangles.size());
  for (int t = 0; t < m.num_triangles(); ++t) shape0[t] = detail::triangle_shape(m, t);

  for (int v = 0; v < out.num_vertices(); ++v) {
    if (on_boundary[v]) continue;
    double lmin = std::numeric_limits<double>::infinity();
    for (int t : adj[v])
      for (int w : out.triangles[t])
        if (w != v) lmin = std::min(lmin, (out.vertices[w] - out.vertices[v]).norm());
    const double angle = 2.0 * std::numbers::pi * hash_uniform(seed, v, 0);
    const double radius = kappa * lmin * std::sqrt(hash_uniform(seed, v, 1));
    Point step = radius * Point(std::cos(angle), std::sin(angle));
    const Point origin = out.vertices[v];
    bool placed = false;
    for (int halving = 0; halving <= 20; ++halving) {
      out.vertices[v] = origin + step;
      if (incident_valid(out, adj[v], shape0)) {
        placed = true;
        break;
      }
      step *= 0.5;
      ++local.halvings;
    }
    if (placed) {
      ++local.moved;
    } else {
      out.vertices[v] = origin;
      ++local.left_unmoved;
    }
  }
  out.h = detail::max_edge_length(out);
  if (stats) *stats = local;
  return out;
}

std::vector<Mesh> build_family(const PolygonSpec& spec, MeshFamilyKind kind, int levels,
                               const FamilyOptions& options) {
  if (levels < 2) throw PreconditionError("a mesh family needs at least two levels");
  Mesh base = initial_triangulation(spec);
  for (int k = 0; k < options.coarse_refinements; ++k) base = refine_regular(base);
  base.level = 0;

  std::vector<Mesh> family;
  family.reserve(levels);
  Mesh structured = std::move(base);
  for (int j = 0; j < levels; ++j) {
    if (j > 0) structured = refine_regular(structured);
    if (kind == MeshFamilyKind::Superconvergent) {
      family.push_back(structured);
    } else {
      const std::uint64_t level_seed = splitmix64(options.seed * 0x100000001b3ULL + j);
      family.push_back(perturb_interior(structured, options.kappa, level_seed));
    }
  }
  return family;
}

}  // namespace dbc
