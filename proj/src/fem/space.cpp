#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "dbc/errors.hpp"
#include "dbc/fem.hpp"
#include "dbc/quadrature.hpp"

namespace dbc {

struct P1Space::Factorizations {
  using ColMatrix = Eigen::SparseMatrix<double>;
  ColMatrix a_ii;                    // interior block of the stiffness
  SparseSymOperator::Matrix a_ib;    // interior rows, boundary columns
  SparseSymOperator::Matrix a_bi;    // boundary rows, interior columns
  Eigen::SimplicialLDLT<ColMatrix> interior;
  Eigen::SimplicialLDLT<ColMatrix> boundary_mass;
  Eigen::VectorXd interior_diagonal;
};

P1Space::P1Space(std::shared_ptr<const Mesh> mesh, InnerSolver solver)
    : mesh_(std::move(mesh)), solver_(solver), fact_(std::make_unique<Factorizations>()) {
  const Mesh& m = *mesh_;
  dofs_ = make_dofmap(m);
  stiffness_ = assemble_stiffness(m);
  mass_ = assemble_mass(m);
  boundary_mass_ = assemble_boundary_mass(m);
  boundary_weights_ = boundary_mass_.apply(Eigen::VectorXd::Ones(dofs_.num_boundary()));

  const int ni = dofs_.num_interior(), nb = dofs_.num_boundary();
  using Trip = Eigen::Triplet<double, int>;
  std::vector<Trip> t_ii, t_ib, t_bi;
  const auto& a = stiffness_.matrix();
  for (int row = 0; row < a.outerSize(); ++row) {
    for (SparseSymOperator::Matrix::InnerIterator it(a, row); it; ++it) {
      const int col = static_cast<int>(it.col());
      const int lr = dofs_.local[row], lc = dofs_.local[col];
      const bool br = dofs_.on_boundary[row], bc = dofs_.on_boundary[col];
      if (!br && !bc) t_ii.emplace_back(lr, lc, it.value());
      if (!br && bc) t_ib.emplace_back(lr, lc, it.value());
      if (br && !bc) t_bi.emplace_back(lr, lc, it.value());
    }
  }
  fact_->a_ii.resize(ni, ni);
  fact_->a_ii.setFromTriplets(t_ii.begin(), t_ii.end());
  fact_->a_ib.resize(ni, nb);
  fact_->a_ib.setFromTriplets(t_ib.begin(), t_ib.end());
  fact_->a_bi.resize(nb, ni);
  fact_->a_bi.setFromTriplets(t_bi.begin(), t_bi.end());
  fact_->interior_diagonal = fact_->a_ii.diagonal();
  if (ni > 0 && solver_ == InnerSolver::Cholesky) {
    fact_->interior.compute(fact_->a_ii);
    if (fact_->interior.info() != Eigen::Success)
      throw SolverDivergence("factorization of the interior stiffness failed");
  }
  Factorizations::ColMatrix mb = boundary_mass_.matrix();
  fact_->boundary_mass.compute(mb);
  if (fact_->boundary_mass.info() != Eigen::Success)
    throw SolverDivergence("factorization of the boundary mass failed");
}

P1Space::~P1Space() = default;

Eigen::VectorXd P1Space::solve_interior(const Eigen::VectorXd& rhs) const {
  if (rhs.size() == 0) return rhs;
  if (solver_ == InnerSolver::Cholesky) return fact_->interior.solve(rhs);
  const auto& a = fact_->a_ii;
  CgOptions opts;
  opts.tol = 1e-13;
  return cg_solve([&a](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out.noalias() = a * in; },
                  rhs, fact_->interior_diagonal, opts)
      .x;
}

VolumeFunction P1Space::solve_dirichlet(const Eigen::VectorXd& load, const TraceFunction& g) const {
  if (load.size() != num_vertices() || g.values.size() != num_boundary())
    throw PreconditionError("solve_dirichlet: size mismatch");
  const Eigen::VectorXd rhs = dofs_.interior_part(load) - fact_->a_ib * g.values;
  const Eigen::VectorXd yi = solve_interior(rhs);
  VolumeFunction y{Eigen::VectorXd(num_vertices())};
  for (int i = 0; i < dofs_.num_boundary(); ++i) y.values[dofs_.boundary[i]] = g.values[i];
  for (int i = 0; i < dofs_.num_interior(); ++i) y.values[dofs_.interior[i]] = yi[i];
  return y;
}

VolumeFunction P1Space::solve_dirichlet(const VolumeField& f, const TraceFunction& g, int order) const {
  return solve_dirichlet(assemble_load(*mesh_, f, order), g);
}

VolumeFunction P1Space::harmonic_extension(const TraceFunction& u) const {
  return solve_dirichlet(Eigen::VectorXd::Zero(num_vertices()), u);
}

VolumeFunction P1Space::harmonic_extension(const BoundaryField& u, int order) const {
  return harmonic_extension(l2_project_boundary(u, order));
}

TraceFunction P1Space::l2_project_boundary(const BoundaryField& g, int order) const {
  return {solve_boundary_mass(assemble_boundary_load(*mesh_, g, order))};
}

Eigen::VectorXd P1Space::normal_derivative_residual(const VolumeFunction& phi,
                                                    const Eigen::VectorXd& load) const {
  for (int v : dofs_.boundary) {
    if (std::abs(phi.values[v]) > 1e-12) {
      std::ostringstream msg;
      msg << "normal derivative needs zero boundary values; vertex " << v << " carries "
          << phi.values[v];
      throw NonzeroTrace(msg.str());
    }
  }
  // boundary rows of A phi - load; phi vanishes on the boundary columns
  const Eigen::VectorXd phi_i = dofs_.interior_part(phi.values);
  return fact_->a_bi * phi_i - dofs_.boundary_part(load);
}

TraceFunction P1Space::normal_derivative(const VolumeFunction& phi, const Eigen::VectorXd& load) const {
  return {solve_boundary_mass(normal_derivative_residual(phi, load))};
}

TraceFunction P1Space::normal_derivative(const VolumeFunction& phi, const VolumeFunction& rhs) const {
  return normal_derivative(phi, mass_.apply(rhs.values));
}

Eigen::VectorXd P1Space::solve_boundary_mass(const Eigen::VectorXd& rhs) const {
  return fact_->boundary_mass.solve(rhs);
}

TraceFunction P1Space::trace(const VolumeFunction& y) const { return {dofs_.boundary_part(y.values)}; }

VolumeFunction P1Space::zero_extension(const TraceFunction& u) const {
  VolumeFunction y{Eigen::VectorXd::Zero(num_vertices())};
  for (int i = 0; i < num_boundary(); ++i) y.values[dofs_.boundary[i]] = u.values[i];
  return y;
}

double P1Space::l2_norm_boundary(const TraceFunction& u) const {
  return std::sqrt(std::max(0.0, boundary_mass_.quadratic_form(u.values)));
}

double P1Space::l2_norm_volume(const VolumeFunction& y) const {
  return std::sqrt(std::max(0.0, mass_.quadratic_form(y.values)));
}

double P1Space::evaluate(const VolumeFunction& y, const FieldPoint& p) const {
  const auto& tri = mesh_->triangles.at(p.triangle);
  return p.bary[0] * y.values[tri[0]] + p.bary[1] * y.values[tri[1]] + p.bary[2] * y.values[tri[2]];
}

FieldPoint P1Space::locate(const Point& x) const {
  FieldPoint fp{x, -1, {}};
  const Mesh& m = *mesh_;
  double best = -1e300;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const Point& a = m.vertices[tri[0]];
    const Point e1 = m.vertices[tri[1]] - a, e2 = m.vertices[tri[2]] - a;
    const double det = e1.x() * e2.y() - e1.y() * e2.x();
    const Point d = x - a;
    const double s = (d.x() * e2.y() - d.y() * e2.x()) / det;
    const double r = (e1.x() * d.y() - e1.y() * d.x()) / det;
    const double worst = std::min({1.0 - s - r, s, r});
    if (worst > best) {
      best = worst;
      fp.triangle = t;
      fp.bary = {1.0 - s - r, s, r};
    }
  }
  if (best < -1e-12) fp.triangle = -1;
  return fp;
}

}  // namespace dbc
