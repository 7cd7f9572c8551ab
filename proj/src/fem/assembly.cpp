#include <cmath>
#include <sstream>

#include "dbc/errors.hpp"
#include "dbc/fem.hpp"
#include "dbc/quadrature.hpp"

namespace dbc {

namespace {

using Triplets = std::vector<Eigen::Triplet<double, int>>;

void check_area(int t, double area) {
  if (!(area > 0.0)) {
    std::ostringstream msg;
    msg << "triangle " << t << " has nonpositive area " << area;
    throw DegenerateElement(msg.str());
  }
}

SparseSymOperator from_triplets(int n, const Triplets& trip) {
  SparseSymOperator::Matrix a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  return SparseSymOperator(std::move(a));
}

}  // namespace

VolumeField make_volume_field(std::function<double(const Point&)> f) {
  return [f = std::move(f)](const FieldPoint& p) { return f(p.x); };
}

SparseSymOperator::SparseSymOperator(Matrix m) : m_(std::move(m)) { m_.makeCompressed(); }

std::span<const int> SparseSymOperator::row_offsets() const {
  return {m_.outerIndexPtr(), static_cast<std::size_t>(m_.rows() + 1)};
}

std::span<const int> SparseSymOperator::col_indices() const {
  return {m_.innerIndexPtr(), static_cast<std::size_t>(m_.nonZeros())};
}

std::span<const double> SparseSymOperator::values() const {
  return {m_.valuePtr(), static_cast<std::size_t>(m_.nonZeros())};
}

double SparseSymOperator::symmetry_defect() const {
  const Matrix t = m_.transpose();
  const double scale = m_.coeffs().cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  const Matrix diff = m_ - t;
  return diff.nonZeros() == 0 ? 0.0 : diff.coeffs().cwiseAbs().maxCoeff() / scale;
}

DofMap make_dofmap(const Mesh& m) {
  DofMap d;
  d.on_boundary.assign(m.vertices.size(), 0);
  d.local.assign(m.vertices.size(), -1);
  for (const auto& e : m.boundary_edges) {
    d.local[e.v0] = static_cast<int>(d.boundary.size());
    d.boundary.push_back(e.v0);
    d.on_boundary[e.v0] = 1;
  }
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (d.on_boundary[v]) continue;
    d.local[v] = static_cast<int>(d.interior.size());
    d.interior.push_back(v);
  }
  return d;
}

Eigen::VectorXd DofMap::boundary_part(const Eigen::VectorXd& full) const {
  Eigen::VectorXd out(boundary.size());
  for (std::size_t i = 0; i < boundary.size(); ++i) out[i] = full[boundary[i]];
  return out;
}

Eigen::VectorXd DofMap::interior_part(const Eigen::VectorXd& full) const {
  Eigen::VectorXd out(interior.size());
  for (std::size_t i = 0; i < interior.size(); ++i) out[i] = full[interior[i]];
  return out;
}

SparseSymOperator assemble_stiffness(const Mesh& m) {
  Triplets trip;
  trip.reserve(9 * m.triangles.size());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const double area = m.triangle_area(t);
    check_area(t, area);
    // gradient of e_k is the rotated opposite edge over 2|T|
    std::array<Point, 3> grad;
    for (int k = 0; k < 3; ++k) {
      const Point e = m.vertices[tri[(k + 2) % 3]] - m.vertices[tri[(k + 1) % 3]];
      grad[k] = Point(-e.y(), e.x()) / (2.0 * area);
    }
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) trip.emplace_back(tri[i], tri[k], area * grad[i].dot(grad[k]));
  }
  return from_triplets(m.num_vertices(), trip);
}

SparseSymOperator assemble_mass(const Mesh& m) {
  Triplets trip;
  trip.reserve(9 * m.triangles.size());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const double area = m.triangle_area(t);
    check_area(t, area);
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) trip.emplace_back(tri[i], tri[k], area / 12.0 * (i == k ? 2.0 : 1.0));
  }
  return from_triplets(m.num_vertices(), trip);
}

SparseSymOperator assemble_boundary_mass(const Mesh& m) {
  const int nb = m.num_boundary_vertices();
  Triplets trip;
  trip.reserve(4 * nb);
  for (int i = 0; i < nb; ++i) {
    const auto& e = m.boundary_edges[i];
    const int j = (i + 1) % nb;
    const double len = (m.vertices[e.v1] - m.vertices[e.v0]).norm();
    trip.emplace_back(i, i, len / 3.0);
    trip.emplace_back(j, j, len / 3.0);
    trip.emplace_back(i, j, len / 6.0);
    trip.emplace_back(j, i, len / 6.0);
  }
  return from_triplets(nb, trip);
}

Eigen::VectorXd assemble_load(const Mesh& m, const VolumeField& f, int order) {
  const auto& rule = triangle_rule(order);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m.num_vertices());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const double jac = 2.0 * m.triangle_area(t);
    const Point& p0 = m.vertices[tri[0]];
    const Point e1 = m.vertices[tri[1]] - p0, e2 = m.vertices[tri[2]] - p0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto [s, r] = rule.points[q];
      FieldPoint fp{p0 + s * e1 + r * e2, t, {1.0 - s - r, s, r}};
      const double v = f(fp) * rule.weights[q] * jac;
      if (!std::isfinite(v)) throw QuadratureFailure("volume data is not finite at a quadrature point");
      for (int k = 0; k < 3; ++k) b[tri[k]] += v * fp.bary[k];
    }
  }
  return b;
}

double integrate_square(const Mesh& m, const VolumeField& f, int order) {
  const auto& rule = triangle_rule(order);
  double sum = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const double jac = 2.0 * m.triangle_area(t);
    const Point& p0 = m.vertices[tri[0]];
    const Point e1 = m.vertices[tri[1]] - p0, e2 = m.vertices[tri[2]] - p0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto [s, r] = rule.points[q];
      FieldPoint fp{p0 + s * e1 + r * e2, t, {1.0 - s - r, s, r}};
      const double v = f(fp);
      sum += v * v * rule.weights[q] * jac;
    }
  }
  return sum;
}

Eigen::VectorXd assemble_boundary_load(const Mesh& m, const BoundaryField& g, int order) {
  const auto& rule = edge_rule(order);
  const int nb = m.num_boundary_vertices();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(nb);
  for (int i = 0; i < nb; ++i) {
    const auto& e = m.boundary_edges[i];
    const Point& a = m.vertices[e.v0];
    const Point d = m.vertices[e.v1] - a;
    const double len = d.norm();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double s = rule.points[q][0];
      const double v = g(a + s * d, e.segment) * rule.weights[q] * len;
      if (!std::isfinite(v)) throw QuadratureFailure("boundary data is not finite at a quadrature point");
      b[i] += v * (1.0 - s);
      b[(i + 1) % nb] += v * s;
    }
  }
  return b;
}

double integrate_boundary(const Mesh& m, const BoundaryField& g, int order) {
  const auto& rule = edge_rule(order);
  double sum = 0.0;
  for (const auto& e : m.boundary_edges) {
    const Point& a = m.vertices[e.v0];
    const Point d = m.vertices[e.v1] - a;
    const double len = d.norm();
    for (std::size_t q = 0; q < rule.size(); ++q)
      sum += g(a + rule.points[q][0] * d, e.segment) * rule.weights[q] * len;
  }
  return sum;
}

}  // namespace dbc
