#pragma once

#include <limits>
#include <memory>
#include <string>

#include "dbc/control.hpp"
#include "dbc/fem.hpp"
#include "dbc/mesh.hpp"

namespace dbc {

enum class LambdaChoice { Leading, Special };

std::string to_string(LambdaChoice c);
LambdaChoice lambda_choice_from_string(const std::string& name);

struct SingularValue {
  double value = 0.0;
  Point gradient = Point::Zero();
};

/// s = r^lambda sin(lambda theta) in the polar frame of a polygon corner.
/// The gradient at the corner itself exists only for lambda >= 1; otherwise
/// CornerSingularity is thrown when with_gradient is set.
SingularValue eval_singular(double lambda, const PolygonSpec& polygon, int corner, const Point& x,
                            bool with_gradient = true);

struct BubbleValue {
  double value = 0.0;
  Point gradient = Point::Zero();
  double laplacian = 0.0;
};

/// Bubble case (1-4) valid for the given sector angle; 0 selects it.
int bubble_case_for(double omega1);
/// Throws CaseMismatch when `bubble_case` does not fit omega1.
BubbleValue bubble(int bubble_case, double omega1, const Point& x);

struct ManufacturedSpec {
  double omega1 = 0.0;
  LambdaChoice lambda_choice = LambdaChoice::Leading;
  bool constrained = false;
  double nu = 1.0;
  /// Bounds for the constrained problem; NaN selects a = -1/lambda_1, b = 1.
  double a = std::numeric_limits<double>::quiet_NaN();
  double b = std::numeric_limits<double>::quiet_NaN();
  int bubble_case = 0;
  /// Corner substitution distance relative to diam(Omega).
  double epsilon_relative = 1e-6;
  /// Test hook: replaces the adjoint by zero.
  bool zero_adjoint = false;
};

/// Exact optimal triple of a manufactured problem on a sector domain.
class ManufacturedProblem {
 public:
  explicit ManufacturedProblem(const ManufacturedSpec& spec);

  const ManufacturedSpec& spec() const { return spec_; }
  const PolygonSpec& polygon() const { return polygon_; }
  double lambda1() const { return lambda1_; }
  double lambda() const { return lambda_; }
  int bubble_case() const { return case_; }
  double nu() const { return spec_.nu; }
  double a() const { return a_; }
  double b() const { return b_; }
  double epsilon() const { return epsilon_; }

  double phi(const Point& x) const;
  Point grad_phi(const Point& x) const;
  double laplace_phi(const Point& x) const;
  /// Outward normal derivative on the given polygon side.
  double dn_phi(const Point& x, int segment) const;
  /// proj_[a,b](dn_phi / nu); the identity map when unconstrained.
  double u(const Point& x, int segment) const;
  /// nu u - dn_phi
  double d(const Point& x, int segment) const;

  BoundaryField u_field() const;
  BoundaryField d_field() const;
  /// Whether dn_phi is unbounded at the corner at the origin.
  bool singular_at_origin() const { return lambda_ < 1.0; }

 private:
  ManufacturedSpec spec_;
  PolygonSpec polygon_;
  double lambda1_ = 0.0, lambda_ = 0.0, a_ = -kInf, b_ = kInf, epsilon_ = 0.0;
  int case_ = 0;
};

/// y_Omega = S_h(u) + Laplace(phi) on one mesh. With nodal set, the Laplacian
/// is replaced by its nodal interpolant.
struct TargetData {
  VolumeFunction discrete_state;  // S_h applied to the L2 projection of the exact control
  VolumeField field;
};

/// A negative epsilon uses mp.epsilon() for the corner substitution.
TargetData build_y_omega(const ManufacturedProblem& mp, const P1Space& space, bool nodal = false,
                         int quad_order = 5, double epsilon = -1.0);

/// Nodal interpolant of the exact control; at a singular origin the value is
/// taken at distance epsilon along Gamma_1 (mp.epsilon() when negative).
TraceFunction interpolate_control(const ManufacturedProblem& mp, const Mesh& m, double epsilon = -1.0);

/// Modified Lagrange interpolant: bound values where the bound is attained on an
/// adjacent edge (sampled), otherwise the given nodal values. Throws AmbiguousBounds.
TraceFunction modified_lagrange_interpolant(const BoundaryField& u_exact, const TraceFunction& nodal,
                                            const Mesh& m, double a, double b,
                                            int samples_per_edge = 33);

/// Weighted quasi-interpolant int d u e_j / int d e_j, patch average of u where
/// the weight integral vanishes. Coefficients are projected onto [a, b], which only
/// removes rounding since the weighted average is convex where d keeps its sign.
TraceFunction casas_raymond_interpolant(const BoundaryField& u_exact, const BoundaryField& d_exact,
                                        const Mesh& m, int order = 9,
                                        double a = -std::numeric_limits<double>::infinity(),
                                        double b = std::numeric_limits<double>::infinity());

/// Builds the control problem of a manufactured case on one space.
ControlProblem make_control_problem(const ManufacturedProblem& mp, std::shared_ptr<const P1Space> space,
                                    const TargetData& target, int quad_order = 5);

}  // namespace dbc
