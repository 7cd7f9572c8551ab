#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dbc/errors.hpp"
#include "dbc/study.hpp"

namespace dbc {

namespace {

constexpr double kTol = 1e-12;

// r = 1 when the rate sits on the Lagrange-interpolation limit
int log_exponent(double x) { return x > 1.0 + kTol && x <= 1.5 + kTol ? 1 : 0; }

}  // namespace

std::string TheoreticalRate::describe() const {
  std::ostringstream os;
  os.precision(5);
  os << "s=" << s;
  if (log_quarter) os << " log^(1/4)";
  else os << " r=" << r;
  os << " (" << source << ")";
  return os.str();
}

TheoreticalRate theoretical_rate(const RateQuery& q) {
  if (q.angles.empty()) throw PreconditionError("rate query without corners");
  if (!q.special.empty() && q.special.size() != q.angles.size())
    throw PreconditionError("rate query: one special flag per corner expected");
  double lambda = kInf, lambda_min_special = kInf, big = kInf;
  bool any_special = false;
  for (std::size_t j = 0; j < q.angles.size(); ++j) {
    const double w = q.angles[j];
    if (!(w > 0.0 && w < 2.0 * std::numbers::pi)) {
      std::ostringstream msg;
      msg << "corner angle " << w << " outside (0, 2pi)";
      throw OutOfRange(msg.str());
    }
    const double lj = std::numbers::pi / w;
    const bool special = !q.special.empty() && q.special[j] && lj < 1.0;
    any_special = any_special || special;
    const double big_j = special ? 2.0 * lj : lj;
    lambda = std::min(lambda, lj);
    lambda_min_special = std::min(lambda_min_special, big_j);
    if (big_j > 1.0 + kTol) big = std::min(big, big_j);
  }

  TheoreticalRate out;
  out.lambda = lambda;
  out.big_lambda = big;
  const bool sc = q.family == MeshFamilyKind::Superconvergent;
  if (!q.constrained) {
    const double l = any_special ? lambda_min_special : lambda;
    out.source = any_special ? "Thm 4.1, Rem 4.6" : "Thm 4.1";
    if (sc) {
      out.s = std::min(1.5, l - 0.5);
    } else {
      out.s = std::min(1.0, l - 0.5);
      out.r = log_exponent(l - 0.5);
    }
    return out;
  }
  if (!std::isfinite(big)) throw UnsupportedRegime("no corner exponent exceeds one");
  if (lambda > 1.0 + kTol || q.assumption) {
    out.source = lambda > 1.0 + kTol ? "Thm 5.1" : "Thm 5.2";
    if (sc) {
      out.s = std::min({1.5, big - 0.5, 2.0 * lambda});
    } else {
      out.s = std::min(1.0, big - 0.5);
      out.r = log_exponent(big - 0.5);
    }
    return out;
  }
  out.source = "Thm 5.3";
  out.s = 0.5;
  out.log_quarter = true;
  return out;
}

RateQuery rate_query(const StudyConfig& cfg) {
  const PolygonSpec poly = build_sector_domain(cfg.omega1);
  RateQuery q;
  q.angles = poly.angles;
  q.special.assign(poly.angles.size(), 0);
  q.special[poly.primary_corner_index] = cfg.lambda_choice == LambdaChoice::Special;
  q.constrained = cfg.constrained;
  q.family = cfg.family;
  q.assumption = cfg.assumption;
  return q;
}

}  // namespace dbc
