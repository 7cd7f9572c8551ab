#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dbc/errors.hpp"
#include "dbc/manufactured.hpp"

namespace dbc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAngleTol = 1e-12;

}  // namespace

std::string to_string(LambdaChoice c) { return c == LambdaChoice::Leading ? "leading" : "special"; }

LambdaChoice lambda_choice_from_string(const std::string& name) {
  if (name == "leading") return LambdaChoice::Leading;
  if (name == "special") return LambdaChoice::Special;
  throw ParseError("unknown lambda choice '" + name + "' (expected leading|special)");
}

SingularValue eval_singular(double lambda, const PolygonSpec& polygon, int corner, const Point& x,
                            bool with_gradient) {
  if (!(lambda > 0.0)) throw PreconditionError("singular exponent must be positive");
  const PolarCoordinates pc = local_polar(polygon, corner, x);
  const Point t = polygon.side_direction(corner);
  const Point tp(-t.y(), t.x());
  SingularValue out;
  if (pc.r == 0.0) {
    if (!with_gradient || lambda > 1.0) return out;
    if (lambda == 1.0) {
      out.gradient = tp;
      return out;
    }
    std::ostringstream msg;
    msg << "gradient of r^" << lambda << " sin(" << lambda << " theta) requested at the corner";
    throw CornerSingularity(msg.str());
  }
  const double c = std::cos(pc.theta), s = std::sin(pc.theta);
  const double rl = std::pow(pc.r, lambda);
  out.value = rl * std::sin(lambda * pc.theta);
  if (with_gradient) {
    const Point er = c * t + s * tp;
    const Point et = -s * t + c * tp;
    const double scale = lambda * rl / pc.r;
    out.gradient = scale * (std::sin(lambda * pc.theta) * er + std::cos(lambda * pc.theta) * et);
  }
  return out;
}

int bubble_case_for(double omega1) {
  if (omega1 <= kPi / 2 + kAngleTol) return 1;
  if (omega1 <= 3 * kPi / 4 + kAngleTol) return 2;
  if (omega1 <= 5 * kPi / 4 + kAngleTol) return 3;
  return 4;
}

BubbleValue bubble(int bubble_case, double omega1, const Point& x) {
  if (bubble_case != bubble_case_for(omega1)) {
    std::ostringstream msg;
    msg << "bubble case " << bubble_case << " does not match sector angle " << omega1
        << " (expected case " << bubble_case_for(omega1) << ")";
    throw CaseMismatch(msg.str());
  }
  const double x1 = x.x(), x2 = x.y();
  BubbleValue bv;
  switch (bubble_case) {
    case 1: {
      const double sw = std::sin(omega1), cw = 1.0 - std::cos(omega1);
      bv.value = sw * (x1 - 1.0) + cw * x2;
      bv.gradient = Point(sw, cw);
      bv.laplacian = 0.0;
      break;
    }
    case 2:
      bv.value = (1.0 - x1) * (1.0 - x2);
      bv.gradient = Point(-(1.0 - x2), -(1.0 - x1));
      bv.laplacian = 0.0;
      break;
    case 3:
      bv.value = (1.0 - x1 * x1) * (1.0 - x2);
      bv.gradient = Point(-2.0 * x1 * (1.0 - x2), -(1.0 - x1 * x1));
      bv.laplacian = -2.0 * (1.0 - x2);
      break;
    default:
      bv.value = (1.0 - x1 * x1) * (1.0 - x2 * x2);
      bv.gradient = Point(-2.0 * x1 * (1.0 - x2 * x2), -2.0 * x2 * (1.0 - x1 * x1));
      bv.laplacian = -2.0 * (1.0 - x2 * x2) - 2.0 * (1.0 - x1 * x1);
      break;
  }
  return bv;
}

ManufacturedProblem::ManufacturedProblem(const ManufacturedSpec& spec)
    : spec_(spec), polygon_(build_sector_domain(spec.omega1)) {
  if (!(spec.nu > 0.0)) throw PreconditionError("regularization weight must be positive");
  lambda1_ = kPi / spec.omega1;
  if (spec.lambda_choice == LambdaChoice::Special) {
    if (!(spec.omega1 > kPi)) throw PreconditionError("the special exponent 2 lambda_1 needs omega1 > pi");
    lambda_ = 2.0 * lambda1_;
  } else {
    lambda_ = lambda1_;
  }
  case_ = spec.bubble_case == 0 ? bubble_case_for(spec.omega1) : spec.bubble_case;
  bubble(case_, spec.omega1, Point::Zero());  // validates the case
  if (spec.constrained) {
    a_ = std::isnan(spec.a) ? -1.0 / lambda1_ : spec.a;
    b_ = std::isnan(spec.b) ? 1.0 : spec.b;
    if (!(a_ < b_)) throw PreconditionError("control bounds must satisfy a < b");
  }
  if (!(spec.epsilon_relative > 0.0)) throw PreconditionError("corner substitution distance must be positive");
  epsilon_ = spec.epsilon_relative * polygon_.diameter();
}

double ManufacturedProblem::phi(const Point& x) const {
  if (spec_.zero_adjoint) return 0.0;
  const auto s = eval_singular(lambda_, polygon_, polygon_.primary_corner_index, x, false);
  return s.value * bubble(case_, spec_.omega1, x).value;
}

Point ManufacturedProblem::grad_phi(const Point& x) const {
  if (spec_.zero_adjoint) return Point::Zero();
  const auto s = eval_singular(lambda_, polygon_, polygon_.primary_corner_index, x);
  const auto bv = bubble(case_, spec_.omega1, x);
  return bv.value * s.gradient + s.value * bv.gradient;
}

double ManufacturedProblem::laplace_phi(const Point& x) const {
  if (spec_.zero_adjoint) return 0.0;
  const auto s = eval_singular(lambda_, polygon_, polygon_.primary_corner_index, x);
  const auto bv = bubble(case_, spec_.omega1, x);
  return 2.0 * s.gradient.dot(bv.gradient) + s.value * bv.laplacian;
}

double ManufacturedProblem::dn_phi(const Point& x, int segment) const {
  return polygon_.outward_normal(segment).dot(grad_phi(x));
}

double ManufacturedProblem::u(const Point& x, int segment) const {
  return std::clamp(dn_phi(x, segment) / spec_.nu, a_, b_);
}

double ManufacturedProblem::d(const Point& x, int segment) const {
  return spec_.nu * u(x, segment) - dn_phi(x, segment);
}

BoundaryField ManufacturedProblem::u_field() const {
  return [this](const Point& x, int segment) { return u(x, segment); };
}

BoundaryField ManufacturedProblem::d_field() const {
  return [this](const Point& x, int segment) { return d(x, segment); };
}

}  // namespace dbc
