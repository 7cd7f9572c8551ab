#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "dbc/mesh.hpp"

namespace dbc {

/// A point handed to volume data: the location, and when known, the
/// containing triangle with barycentric coordinates.
struct FieldPoint {
  Point x;
  int triangle = -1;
  std::array<double, 3> bary{};
};

using VolumeField = std::function<double(const FieldPoint&)>;
/// Boundary data may depend on the polygon side (normal derivatives jump at corners).
using BoundaryField = std::function<double(const Point&, int segment)>;

VolumeField make_volume_field(std::function<double(const Point&)> f);

/// Nodal coefficients on all mesh vertices (Y_h).
struct VolumeFunction {
  Eigen::VectorXd values;
};

/// Nodal coefficients on the boundary vertices, in boundary-cycle order (U_h).
struct TraceFunction {
  Eigen::VectorXd values;
};

/// Symmetric sparse operator in compressed-row storage.
class SparseSymOperator {
 public:
  using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

  SparseSymOperator() = default;
  explicit SparseSymOperator(Matrix m);

  int dimension() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  std::span<const int> row_offsets() const;
  std::span<const int> col_indices() const;
  std::span<const double> values() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return m_ * x; }
  Eigen::VectorXd diagonal() const { return m_.diagonal(); }
  double quadratic_form(const Eigen::VectorXd& x) const { return x.dot(m_ * x); }
  /// max |a_ij - a_ji| / max |a_ij|
  double symmetry_defect() const;

 private:
  Matrix m_;
};

struct DofMap {
  std::vector<int> boundary;   // vertex ids in boundary-cycle order
  std::vector<int> interior;   // ascending vertex ids
  std::vector<int> local;      // vertex -> index within its block
  std::vector<char> on_boundary;

  int num_boundary() const { return static_cast<int>(boundary.size()); }
  int num_interior() const { return static_cast<int>(interior.size()); }
  Eigen::VectorXd boundary_part(const Eigen::VectorXd& full) const;
  Eigen::VectorXd interior_part(const Eigen::VectorXd& full) const;
};

DofMap make_dofmap(const Mesh& m);

SparseSymOperator assemble_stiffness(const Mesh& m);
SparseSymOperator assemble_mass(const Mesh& m);
/// Indexed by boundary-cycle position.
SparseSymOperator assemble_boundary_mass(const Mesh& m);

/// b_i = int_Omega f e_i by triangle quadrature of the given order.
Eigen::VectorXd assemble_load(const Mesh& m, const VolumeField& f, int order = 5);
/// b_i = int_Gamma g e_i by Gauss quadrature per edge, boundary-cycle order.
Eigen::VectorXd assemble_boundary_load(const Mesh& m, const BoundaryField& g, int order = 5);
/// int_Omega f^2 by triangle quadrature.
double integrate_square(const Mesh& m, const VolumeField& f, int order = 5);
/// int_Gamma g by Gauss quadrature per edge.
double integrate_boundary(const Mesh& m, const BoundaryField& g, int order = 5);

using LinearOperator = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

struct CgOptions {
  double tol = 1e-11;      // relative to |b|
  double abs_tol = 0.0;    // stop also when |r| <= abs_tol
  int maxit = 20000;
};

struct CgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients. Throws SolverDivergence when the
/// tolerance is not reached within maxit iterations.
CgResult cg_solve(const LinearOperator& op, const Eigen::VectorXd& b,
                  const Eigen::VectorXd& jacobi_diagonal, const CgOptions& options = {},
                  const Eigen::VectorXd* initial_guess = nullptr);
CgResult cg_solve(const SparseSymOperator& op, const Eigen::VectorXd& b,
                  const CgOptions& options = {});

enum class InnerSolver { Cholesky, Cg };

/// P1 finite element space on one mesh, holding its assembled operators and
/// the factorizations used by Dirichlet solves. Immutable after construction.
class P1Space {
 public:
  explicit P1Space(std::shared_ptr<const Mesh> mesh, InnerSolver solver = InnerSolver::Cholesky);
  ~P1Space();
  P1Space(const P1Space&) = delete;
  P1Space& operator=(const P1Space&) = delete;

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  const SparseSymOperator& stiffness() const { return stiffness_; }
  const SparseSymOperator& mass() const { return mass_; }
  const SparseSymOperator& boundary_mass() const { return boundary_mass_; }
  /// int_Gamma e_i, the lumped boundary mass.
  const Eigen::VectorXd& boundary_weights() const { return boundary_weights_; }
  int num_vertices() const { return mesh_->num_vertices(); }
  int num_boundary() const { return dofs_.num_boundary(); }

  /// y with y|_Gamma = g nodally and (grad y, grad z) = load(z) for z in Y_{0,h};
  /// `load` holds the full vector (f, e_i).
  VolumeFunction solve_dirichlet(const Eigen::VectorXd& load, const TraceFunction& g) const;
  VolumeFunction solve_dirichlet(const VolumeField& f, const TraceFunction& g, int order = 5) const;

  /// Discrete harmonic extension S_h; the trace is reproduced exactly.
  VolumeFunction harmonic_extension(const TraceFunction& u) const;
  VolumeFunction harmonic_extension(const BoundaryField& u, int order = 5) const;

  TraceFunction l2_project_boundary(const BoundaryField& g, int order = 5) const;

  /// Variational normal derivative of phi (zero trace):
  /// (d, z)_Gamma = -(rhs, z)_Omega + (grad phi, grad z)_Omega for all z in Y_h,
  /// with `load` the full vector (rhs, e_i). Throws NonzeroTrace.
  TraceFunction normal_derivative(const VolumeFunction& phi, const Eigen::VectorXd& load) const;
  /// Same with a nodal L2 representative of rhs.
  TraceFunction normal_derivative(const VolumeFunction& phi, const VolumeFunction& rhs) const;
  /// Boundary rows of A phi - load, i.e. M_Gamma times the normal derivative.
  Eigen::VectorXd normal_derivative_residual(const VolumeFunction& phi,
                                             const Eigen::VectorXd& load) const;

  Eigen::VectorXd solve_boundary_mass(const Eigen::VectorXd& rhs) const;
  TraceFunction trace(const VolumeFunction& y) const;
  VolumeFunction zero_extension(const TraceFunction& u) const;

  double l2_norm_boundary(const TraceFunction& u) const;
  double l2_norm_volume(const VolumeFunction& y) const;

  /// P1 interpolation of a nodal function at a field point with known triangle.
  double evaluate(const VolumeFunction& y, const FieldPoint& p) const;
  /// Brute-force point location; returns a field point with triangle -1 when outside.
  FieldPoint locate(const Point& x) const;

 private:
  Eigen::VectorXd solve_interior(const Eigen::VectorXd& rhs) const;

  std::shared_ptr<const Mesh> mesh_;
  DofMap dofs_;
  SparseSymOperator stiffness_, mass_, boundary_mass_;
  Eigen::VectorXd boundary_weights_;
  InnerSolver solver_;
  struct Factorizations;
  std::unique_ptr<Factorizations> fact_;
};

}  // namespace dbc
