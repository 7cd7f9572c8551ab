#include <cmath>
#include <iostream>
#include <sstream>

#include "dbc/control.hpp"
#include "dbc/errors.hpp"

namespace dbc {

void ControlProblem::validate() const {
  if (!space) throw PreconditionError("control problem without a finite element space");
  if (!(nu > 0.0)) {
    std::ostringstream msg;
    msg << "regularization weight must be positive, got " << nu;
    throw PreconditionError(msg.str());
  }
  if (std::isnan(a) || std::isnan(b) || !(a < b)) {
    std::ostringstream msg;
    msg << "control bounds must satisfy a < b, got [" << a << ", " << b << "]";
    throw PreconditionError(msg.str());
  }
  if (a > 0.0 || b < 0.0) {
    std::ostringstream msg;
    msg << "0 is not in [" << a << ", " << b << "]";
    if (!allow_zero_outside_bounds) throw PreconditionError(msg.str());
    std::cerr << "warning: " << msg.str() << "\n";
  }
}

ReducedProblem::ReducedProblem(ControlProblem p, ReducedOptions opts)
    : p_(std::move(p)), opts_(opts) {
  p_.validate();
  const Mesh& m = p_.space->mesh();
  if (p_.y_target) {
    target_load_ = assemble_load(m, p_.y_target, p_.quad_order);
    target_square_ = integrate_square(m, p_.y_target, p_.quad_order);
  } else {
    target_load_ = Eigen::VectorXd::Zero(m.num_vertices());
  }
}

VolumeFunction ReducedProblem::state(const TraceFunction& u) const {
  return space().harmonic_extension(u);
}

VolumeFunction ReducedProblem::adjoint(const VolumeFunction& y, bool with_target) const {
  Eigen::VectorXd load = space().mass().apply(y.values);
  if (with_target) load -= target_load_;
  return space().solve_dirichlet(load, TraceFunction{Eigen::VectorXd::Zero(space().num_boundary())});
}

VolumeFunction ReducedProblem::adjoint(const VolumeFunction& y) const { return adjoint(y, true); }

Eigen::VectorXd ReducedProblem::weak_normal_derivative(const VolumeFunction& phi,
                                                       const VolumeFunction& y,
                                                       bool with_target) const {
  Eigen::VectorXd load = space().mass().apply(y.values);
  if (with_target) load -= target_load_;
  Eigen::VectorXd r = space().normal_derivative_residual(phi, load);
  if (opts_.flip_normal_derivative) r = -r;
  return r;
}

TraceFunction ReducedProblem::normal_derivative(const VolumeFunction& phi, const VolumeFunction& y) const {
  return {space().solve_boundary_mass(weak_normal_derivative(phi, y, true))};
}

double ReducedProblem::objective(const TraceFunction& u) const {
  const VolumeFunction y = state(u);
  // quadrature of (y - y_target)^2 expanded; exact since y^2 is quadratic per triangle
  const double misfit = space().mass().quadratic_form(y.values) - 2.0 * y.values.dot(target_load_) +
                        target_square_;
  return 0.5 * misfit + 0.5 * p_.nu * space().boundary_mass().quadratic_form(u.values);
}

ReducedResidual ReducedProblem::reduced_residual(const TraceFunction& u) const {
  const VolumeFunction y = state(u);
  const VolumeFunction phi = adjoint(y, true);
  ReducedResidual res;
  res.weak = p_.nu * space().boundary_mass().apply(u.values) - weak_normal_derivative(phi, y, true);
  res.lumped = res.weak.cwiseQuotient(space().boundary_weights());
  return res;
}

TraceFunction ReducedProblem::apply_hessian(const TraceFunction& v) const {
  const VolumeFunction y = state(v);
  const VolumeFunction phi = adjoint(y, false);
  return {p_.nu * space().boundary_mass().apply(v.values) - weak_normal_derivative(phi, y, false)};
}

double ReducedProblem::stationarity_norm(const Eigen::VectorXd& weak) const {
  return std::sqrt(weak.cwiseAbs2().cwiseQuotient(space().boundary_weights()).sum());
}

Eigen::VectorXd ReducedProblem::hessian_preconditioner() const {
  return p_.nu * space().boundary_mass().diagonal();
}

}  // namespace dbc
