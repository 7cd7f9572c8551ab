#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dbc {

using Point = Eigen::Vector2d;

/// Polygonal domain with corners ordered counterclockwise.
///
/// Side j (Gamma_j) joins corners j and j+1. angles[j] is the interior angle
/// between Gamma_j and Gamma_{j-1}, measured counterclockwise from Gamma_j.
struct PolygonSpec {
  std::vector<Point> corners;
  std::vector<double> angles;
  int primary_corner_index = 0;

  int size() const { return static_cast<int>(corners.size()); }
  const Point& corner(int j) const;
  Point side_direction(int j) const;      // unit tangent of Gamma_j
  Point outward_normal(int side) const;
  double side_length(int side) const;
  double perimeter() const;
  double area() const;
  double diameter() const;
  bool contains(const Point& x, double tol = 1e-12) const;
};

/// Builds a polygon from counterclockwise corners and fills in the angles.
/// Throws TriangulationFailure for coincident corners or clockwise input.
PolygonSpec make_polygon(std::vector<Point> corners, int primary_corner_index = 0);

/// The sector test domain: the triangle (0,0),(1,0),(cos w, sin w) for
/// w <= pi/2, otherwise the part of (-1,1)^2 with polar angle in (0, w).
PolygonSpec build_sector_domain(double omega1);

struct BoundaryEdge {
  int v0 = -1;  // oriented counterclockwise around the domain
  int v1 = -1;
  int triangle = -1;
  int segment = -1;  // polygon side id
};

struct Mesh {
  PolygonSpec polygon;
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;   // closed cycle starting at the primary corner
  std::vector<int> corner_vertex_ids;
  int level = 0;
  double h = 0.0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_boundary_vertices() const { return static_cast<int>(boundary_edges.size()); }
  double triangle_area(int t) const;  // signed
  double total_area() const;
  double boundary_length() const;
  /// max over triangles of circumradius / inradius
  double shape_constant() const;
};

enum class MeshFamilyKind { Superconvergent, Generic };

std::string to_string(MeshFamilyKind kind);
MeshFamilyKind family_kind_from_string(const std::string& name);

/// Assembles a mesh from raw arrays: orients triangles, extracts the boundary
/// cycle, tags sides and locates the polygon corners.
Mesh make_mesh(PolygonSpec polygon, std::vector<Point> vertices,
               std::vector<std::array<int, 3>> triangles, int level = 0);

Mesh initial_triangulation(const PolygonSpec& spec);
Mesh refine_regular(const Mesh& m);

struct PerturbationStats {
  int moved = 0;
  int halvings = 0;
  int left_unmoved = 0;  // no valid displacement after 20 halvings
};

Mesh perturb_interior(const Mesh& m, double kappa, std::uint64_t seed,
                      PerturbationStats* stats = nullptr);

struct FamilyOptions {
  double kappa = 0.2;
  std::uint64_t seed = 1;
  int coarse_refinements = 2;  // red refinements applied before level 0
};

std::vector<Mesh> build_family(const PolygonSpec& spec, MeshFamilyKind kind, int levels,
                               const FamilyOptions& options = {});

struct IrregularityReport {
  double max_interior_discrepancy = 0.0;
  double discrepancy_ratio = 0.0;
  double e2_area_fraction = 0.0;
  int boundary_vertex_violations = 0;
  int exempt_edges = 0;
  int interior_edges = 0;
  double threshold = 0.0;  // c in |l - l'| <= c h^2
  bool verdict = false;
};

IrregularityReport check_h2_irregular(const Mesh& m);

struct PolarCoordinates {
  double r = 0.0;
  double theta = 0.0;
};

/// Polar coordinates around corner j, theta measured from Gamma_j.
PolarCoordinates local_polar(const PolygonSpec& polygon, int corner, const Point& x);
PolarCoordinates local_polar(const Mesh& m, int corner, const Point& x);

void write_mesh(std::ostream& os, const Mesh& m);
Mesh read_mesh(std::istream& is);
void write_mesh_file(const std::string& path, const Mesh& m);
Mesh read_mesh_file(const std::string& path);

}  // namespace dbc
