#pragma once

#include <iosfwd>
#include <limits>
#include <memory>
#include <vector>

#include "dbc/fem.hpp"

namespace dbc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// min (1/2)|S_h u - y_target|^2 + (nu/2)|u|^2_Gamma over a <= u <= b.
struct ControlProblem {
  std::shared_ptr<const P1Space> space;
  double nu = 1.0;
  double a = -kInf;
  double b = kInf;
  VolumeField y_target;  // empty means y_target = 0
  int quad_order = 5;
  /// Accept bounds with 0 outside [a,b] (a warning is printed instead of an error).
  bool allow_zero_outside_bounds = false;

  bool unconstrained() const { return a == -kInf && b == kInf; }
  /// Throws PreconditionError on invalid parameters.
  void validate() const;
};

struct ControlSolution {
  TraceFunction u;
  VolumeFunction y;
  VolumeFunction phi;
  std::vector<int> active_lower;  // boundary-cycle positions
  std::vector<int> active_upper;
  int pdas_iterations = 0;
  int cg_iterations = 0;
  double residual_norm = 0.0;
  double objective_value = 0.0;
};

struct ReducedResidual {
  Eigen::VectorXd weak;    // g_i = int_Gamma (nu u - d_n^h phi) e_i
  Eigen::VectorXd lumped;  // g_i / int_Gamma e_i
};

struct ReducedOptions {
  /// Test hook: negates the discrete normal derivative inside the gradient.
  bool flip_normal_derivative = false;
};

/// The reduced functional J_h(u) and its derivatives for one problem.
class ReducedProblem {
 public:
  explicit ReducedProblem(ControlProblem p, ReducedOptions opts = {});

  const ControlProblem& problem() const { return p_; }
  const P1Space& space() const { return *p_.space; }

  double objective(const TraceFunction& u) const;
  ReducedResidual reduced_residual(const TraceFunction& u) const;
  /// nu M_Gamma v + B'MBv with homogeneous data.
  TraceFunction apply_hessian(const TraceFunction& v) const;

  VolumeFunction state(const TraceFunction& u) const;
  VolumeFunction adjoint(const VolumeFunction& y) const;
  TraceFunction normal_derivative(const VolumeFunction& phi, const VolumeFunction& y) const;
  /// sqrt(sum g_i^2 / int_Gamma e_i)
  double stationarity_norm(const Eigen::VectorXd& weak) const;
  /// Diagonal of nu M_Gamma, the Jacobi preconditioner of the Hessian.
  Eigen::VectorXd hessian_preconditioner() const;

 private:
  // boundary rows of A phi - M y + target_load, i.e. M_Gamma d_n^h phi
  Eigen::VectorXd weak_normal_derivative(const VolumeFunction& phi, const VolumeFunction& y,
                                         bool with_target) const;
  VolumeFunction adjoint(const VolumeFunction& y, bool with_target) const;

  ControlProblem p_;
  ReducedOptions opts_;
  Eigen::VectorXd target_load_;  // (y_target, e_i) on all vertices
  double target_square_ = 0.0;   // int y_target^2
};

struct SolverOptions {
  double tol = 1e-11;  // relative to the initial stationarity norm
  int maxit = 30;      // PDAS iterations
  int cg_maxit = 5000;
  std::ostream* trace = nullptr;  // CSV trace when set
};

ControlSolution solve_unconstrained(const ReducedProblem& rp, const SolverOptions& opts = {});
/// Primal-dual active set method. Throws MaxIterationsExceeded.
ControlSolution solve_constrained_pdas(const ReducedProblem& rp, const SolverOptions& opts = {});
/// Dispatches on the bounds.
ControlSolution solve(const ReducedProblem& rp, const SolverOptions& opts = {});

/// Most negative g_i (c - u_i) over the box edge generators c in {a, b}.
double verify_discrete_vi(const ReducedProblem& rp, const ControlSolution& s);

}  // namespace dbc
