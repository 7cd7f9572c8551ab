#include <algorithm>
#include <cmath>
#include <sstream>

#include "dbc/errors.hpp"
#include "dbc/manufactured.hpp"
#include "dbc/quadrature.hpp"

namespace dbc {

namespace {

// exact value at boundary vertex i of the cycle, one-sided limits averaged at corners
double nodal_value(const ManufacturedProblem& mp, const Mesh& m, int i, double eps) {
  const int nb = m.num_boundary_vertices();
  const BoundaryEdge& out = m.boundary_edges[i];
  const BoundaryEdge& in = m.boundary_edges[(i + nb - 1) % nb];
  const Point& x = m.vertices[out.v0];
  const PolygonSpec& poly = mp.polygon();
  const int primary = poly.primary_corner_index;
  if (mp.singular_at_origin() && (x - poly.corner(primary)).norm() == 0.0)
    return mp.u(x + eps * poly.side_direction(primary), primary);
  if (out.segment == in.segment) return mp.u(x, out.segment);
  return 0.5 * (mp.u(x, out.segment) + mp.u(x, in.segment));
}

}  // namespace

TraceFunction interpolate_control(const ManufacturedProblem& mp, const Mesh& m, double epsilon) {
  const double eps = epsilon > 0.0 ? epsilon : mp.epsilon();
  const int nb = m.num_boundary_vertices();
  TraceFunction out{Eigen::VectorXd(nb)};
  for (int i = 0; i < nb; ++i) out.values[i] = nodal_value(mp, m, i, eps);
  return out;
}

TargetData build_y_omega(const ManufacturedProblem& mp, const P1Space& space, bool nodal, int quad_order,
                         double epsilon) {
  TargetData td;
  const auto state = std::make_shared<VolumeFunction>(
      space.harmonic_extension(space.l2_project_boundary(mp.u_field(), quad_order)));
  td.discrete_state = *state;
  const P1Space* sp = &space;
  if (!nodal) {
    td.field = [exact = mp, sp, state](const FieldPoint& p) {
      const FieldPoint q = p.triangle >= 0 ? p : sp->locate(p.x);
      return sp->evaluate(*state, q) + exact.laplace_phi(p.x);
    };
    return td;
  }
  const Mesh& m = space.mesh();
  const PolygonSpec& poly = mp.polygon();
  const int primary = poly.primary_corner_index;
  auto values = std::make_shared<VolumeFunction>(*state);
  for (int v = 0; v < m.num_vertices(); ++v) {
    Point x = m.vertices[v];
    if (mp.singular_at_origin() && (x - poly.corner(primary)).norm() == 0.0)
      x += (epsilon > 0.0 ? epsilon : mp.epsilon()) * poly.side_direction(primary);
    values->values[v] += mp.laplace_phi(x);
  }
  td.field = [sp, values](const FieldPoint& p) {
    const FieldPoint q = p.triangle >= 0 ? p : sp->locate(p.x);
    return sp->evaluate(*values, q);
  };
  return td;
}

ControlProblem make_control_problem(const ManufacturedProblem& mp, std::shared_ptr<const P1Space> space,
                                    const TargetData& target, int quad_order) {
  ControlProblem p;
  p.space = std::move(space);
  p.nu = mp.nu();
  p.a = mp.a();
  p.b = mp.b();
  p.y_target = target.field;
  p.quad_order = quad_order;
  return p;
}

TraceFunction modified_lagrange_interpolant(const BoundaryField& u_exact, const TraceFunction& nodal,
                                            const Mesh& m, double a, double b, int samples_per_edge) {
  const int nb = m.num_boundary_vertices();
  if (nodal.values.size() != nb) throw PreconditionError("nodal values do not match the boundary mesh");
  // per-edge sampled extremes at interior sample points
  std::vector<double> lo(nb), hi(nb);
  for (int i = 0; i < nb; ++i) {
    const auto& e = m.boundary_edges[i];
    const Point& p = m.vertices[e.v0];
    const Point d = m.vertices[e.v1] - p;
    lo[i] = kInf;
    hi[i] = -kInf;
    for (int k = 0; k < samples_per_edge; ++k) {
      const double v = u_exact(p + ((k + 0.5) / samples_per_edge) * d, e.segment);
      lo[i] = std::min(lo[i], v);
      hi[i] = std::max(hi[i], v);
    }
  }
  TraceFunction out{Eigen::VectorXd(nb)};
  for (int j = 0; j < nb; ++j) {
    const int prev = (j + nb - 1) % nb;
    const bool at_a = std::min({lo[prev], lo[j], nodal.values[j]}) <= a;
    const bool at_b = std::max({hi[prev], hi[j], nodal.values[j]}) >= b;
    if (at_a && at_b) {
      std::ostringstream msg;
      msg << "both control bounds are attained next to boundary node " << j
          << "; the mesh is too coarse for the modified Lagrange interpolant";
      throw AmbiguousBounds(msg.str());
    }
    out.values[j] = at_a ? a : at_b ? b : std::clamp(nodal.values[j], a, b);
  }
  return out;
}

TraceFunction casas_raymond_interpolant(const BoundaryField& u_exact, const BoundaryField& d_exact,
                                        const Mesh& m, int order, double a, double b) {
  const auto& rule = edge_rule(order);
  const int nb = m.num_boundary_vertices();
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(nb), moment = weight, scale = weight, mean = weight,
                  length = weight;
  for (int i = 0; i < nb; ++i) {
    const auto& e = m.boundary_edges[i];
    const int j = (i + 1) % nb;
    const Point& p = m.vertices[e.v0];
    const Point dv = m.vertices[e.v1] - p;
    const double len = dv.norm();
    length[i] += len;
    length[j] += len;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double s = rule.points[q][0];
      const Point x = p + s * dv;
      const double w = rule.weights[q] * len;
      const double uq = u_exact(x, e.segment), dq = d_exact(x, e.segment);
      for (const auto& [node, hat] : {std::pair{i, 1.0 - s}, std::pair{j, s}}) {
        weight[node] += w * dq * hat;
        moment[node] += w * dq * uq * hat;
        scale[node] += w * std::abs(dq) * hat;
      }
      mean[i] += w * uq;
      mean[j] += w * uq;
    }
  }
  TraceFunction out{Eigen::VectorXd(nb)};
  for (int j = 0; j < nb; ++j) {
    if (std::abs(weight[j]) > 1e-14 * scale[j]) out.values[j] = moment[j] / weight[j];
    else out.values[j] = mean[j] / length[j];
    out.values[j] = std::clamp(out.values[j], a, b);
  }
  return out;
}

}  // namespace dbc
