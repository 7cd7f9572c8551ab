#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dbc/checks.hpp"
#include "dbc/errors.hpp"
#include "dbc/manufactured.hpp"
#include "dbc/quadrature.hpp"
#include "dbc/study.hpp"

namespace dbc {

namespace {

struct Case {
  ManufacturedProblem mp;
  std::shared_ptr<const P1Space> space;
  TargetData target;
};

Case make_case(double omega1, bool constrained, int level) {
  ManufacturedSpec ms;
  ms.omega1 = omega1;
  ms.constrained = constrained;
  ManufacturedProblem mp(ms);
  const auto family = build_family(mp.polygon(), MeshFamilyKind::Generic, level + 1);
  auto space = std::make_shared<const P1Space>(std::make_shared<const Mesh>(family.back()));
  TargetData td = build_y_omega(mp, *space, false, 5, 0.25 * family.back().h);
  return {std::move(mp), std::move(space), std::move(td)};
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

CheckResult upper(const std::string& name, double value, double threshold, std::string detail = {}) {
  return {name, value <= threshold, value, threshold, std::move(detail)};
}

CheckResult lower(const std::string& name, double value, double threshold, std::string detail = {}) {
  return {name, value >= threshold, value, threshold, std::move(detail)};
}

// int_Gamma d (u_h - u) with u_h piecewise linear, plus the L2 norms of d and u
struct Orthogonality {
  double defect = 0.0;
  double d_norm = 0.0;
  double u_norm = 0.0;
};

Orthogonality orthogonality(const BoundaryField& u, const BoundaryField& d, const TraceFunction& uh,
                            const Mesh& m) {
  const auto& rule = edge_rule(9);
  const int nb = m.num_boundary_vertices();
  Orthogonality o;
  for (int i = 0; i < nb; ++i) {
    const auto& e = m.boundary_edges[i];
    const Point& p = m.vertices[e.v0];
    const Point dv = m.vertices[e.v1] - p;
    const double len = dv.norm();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double s = rule.points[q][0];
      const Point x = p + s * dv;
      const double w = rule.weights[q] * len;
      const double uq = u(x, e.segment), dq = d(x, e.segment);
      const double uhq = (1.0 - s) * uh.values[i] + s * uh.values[(i + 1) % nb];
      o.defect += w * dq * (uhq - uq);
      o.d_norm += w * dq * dq;
      o.u_norm += w * uq * uq;
    }
  }
  o.d_norm = std::sqrt(o.d_norm);
  o.u_norm = std::sqrt(o.u_norm);
  return o;
}

bool feasible(const TraceFunction& u, double a, double b) {
  return (u.values.array() >= a).all() && (u.values.array() <= b).all();
}

}  // namespace

std::vector<CheckResult> run_property_checks(const CheckOptions& opts) {
  const double omega1 = opts.omega1 > 0.0 ? opts.omega1 : 1.5 * std::numbers::pi;
  std::mt19937_64 rng(opts.seed);
  std::vector<CheckResult> out;

  const Case unc = make_case(omega1, false, opts.level);
  const P1Space& sp = *unc.space;
  const Mesh& m = sp.mesh();
  const int nb = sp.num_boundary(), nv = sp.num_vertices();
  ReducedOptions ro;
  ro.flip_normal_derivative = opts.flip_normal_derivative;
  const ReducedProblem rp(make_control_problem(unc.mp, unc.space, unc.target), ro);

  // assembled operators
  {
    const double defect = std::max({sp.stiffness().symmetry_defect(), sp.mass().symmetry_defect(),
                                    sp.boundary_mass().symmetry_defect()});
    out.push_back(upper("operator-symmetry", defect, 1e-14));
    const auto& a = sp.stiffness().matrix();
    double worst = 0.0;
    for (int r = 0; r < a.outerSize(); ++r) {
      double sum = 0.0, big = 0.0;
      for (SparseSymOperator::Matrix::InnerIterator it(a, r); it; ++it) {
        sum += it.value();
        big = std::max(big, std::abs(it.value()));
      }
      worst = std::max(worst, std::abs(sum) / big);
    }
    out.push_back(upper("stiffness-row-sums", worst, 1e-12));
  }

  // reduced Hessian: symmetry and coercivity
  {
    double sym = 0.0, margin = kInf;
    for (int k = 0; k < 10; ++k) {
      const TraceFunction v{random_vector(rng, nb)}, w{random_vector(rng, nb)};
      const Eigen::VectorXd hv = rp.apply_hessian(v).values, hw = rp.apply_hessian(w).values;
      const double lhs = hv.dot(w.values), rhs = v.values.dot(hw);
      sym = std::max(sym, std::abs(lhs - rhs) / std::max(std::abs(lhs), hv.norm() * w.values.norm()));
      const double base = unc.mp.nu() * sp.boundary_mass().quadratic_form(v.values);
      margin = std::min(margin, (hv.dot(v.values) - base) / base);
    }
    out.push_back(upper("hessian-symmetry", sym, 1e-10, "10 random pairs"));
    out.push_back(lower("hessian-coercivity", margin, -1e-12, "min (<Hv,v> - nu v'Mv) / nu v'Mv"));
  }

  // gradient against central differences
  {
    const TraceFunction u{random_vector(rng, nb)};
    const Eigen::VectorXd g = rp.reduced_residual(u).weak;
    const double step = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd v = random_vector(rng, nb);
      const double fd = (rp.objective(TraceFunction{u.values + step * v}) -
                         rp.objective(TraceFunction{u.values - step * v})) /
                        (2.0 * step);
      const double exact = g.dot(v);
      worst = std::max(worst, std::abs(fd - exact) / std::max(std::abs(exact), 1e-300));
    }
    out.push_back(upper("gradient-finite-differences", worst, 1e-6, "10 directions, step 1e-5"));
  }

  // S_h reproduces discrete traces, constants and affine functions
  {
    bool exact_trace = true;
    for (int k = 0; k < 20; ++k) {
      const TraceFunction u{random_vector(rng, nb)};
      exact_trace = exact_trace && (sp.trace(sp.harmonic_extension(u)).values.array() == u.values.array()).all();
    }
    out.push_back({"harmonic-extension-trace", exact_trace, exact_trace ? 0.0 : 1.0, 0.0, "20 random traces"});
    double worst = 0.0;
    for (const auto& f : {std::function<double(const Point&)>([](const Point&) { return 1.7; }),
                          std::function<double(const Point&)>([](const Point& x) { return 0.3 - 2 * x.x() + x.y(); })}) {
      TraceFunction u{Eigen::VectorXd(nb)};
      for (int i = 0; i < nb; ++i) u.values[i] = f(m.vertices[sp.dofs().boundary[i]]);
      const VolumeFunction y = sp.harmonic_extension(u);
      for (int v = 0; v < nv; ++v) worst = std::max(worst, std::abs(y.values[v] - f(m.vertices[v])));
    }
    out.push_back(upper("harmonic-extension-affine", worst, 1e-12));
  }

  // defining identity of the discrete normal derivative
  {
    const TraceFunction u{random_vector(rng, nb)};
    const VolumeFunction y = rp.state(u);
    const VolumeFunction phi = rp.adjoint(y);
    const TraceFunction dn = rp.normal_derivative(phi, y);
    const Eigen::VectorXd rhs_load = sp.mass().apply(y.values) -
                                     assemble_load(m, unc.target.field, 5);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd z = random_vector(rng, nv);
      const Eigen::VectorXd zb = sp.dofs().boundary_part(z);
      const double boundary = dn.values.dot(sp.boundary_mass().apply(zb));
      const double volume = rhs_load.dot(z);
      const double grad = phi.values.dot(sp.stiffness().apply(z));
      const double scale = std::abs(boundary) + std::abs(volume) + std::abs(grad);
      worst = std::max(worst, std::abs(boundary + volume - grad) / scale);
    }
    out.push_back(upper("normal-derivative-identity", worst, 1e-10, "20 random test functions"));
  }

  // interpolants on the constrained case
  const Case con = make_case(omega1, true, opts.level);
  {
    const Mesh& cm = con.space->mesh();
    const auto uf = con.mp.u_field(), df = con.mp.d_field();
    const double a = con.mp.a(), b = con.mp.b();
    const TraceFunction cr = casas_raymond_interpolant(uf, df, cm, 9, a, b);
    const TraceFunction nodal = interpolate_control(con.mp, cm, 0.25 * cm.h);
    const TraceFunction ml = modified_lagrange_interpolant(uf, nodal, cm, a, b);
    for (const auto& [name, uh] : {std::pair{std::string("casas-raymond"), cr}, std::pair{std::string("modified-lagrange"), ml}}) {
      const Orthogonality o = orthogonality(uf, df, uh, cm);
      out.push_back(upper("interpolant-orthogonality-" + name, std::abs(o.defect), 1e-8 * o.d_norm * o.u_norm,
                          "order-9 quadrature"));
      const bool ok = feasible(uh, a, b);
      out.push_back({"interpolant-feasibility-" + name, ok, ok ? 0.0 : 1.0, 0.0, ""});
    }
  }

  // active set method
  {
    const ReducedProblem crp(make_control_problem(con.mp, con.space, con.target), ro);
    SolverOptions so;
    const ControlSolution s = solve_constrained_pdas(crp, so);
    out.push_back(upper("pdas-iterations", s.pdas_iterations, 30));
    out.push_back(lower("pdas-variational-inequality", verify_discrete_vi(crp, s), -1e-8));

    ControlProblem wide = make_control_problem(unc.mp, unc.space, unc.target);
    wide.a = -1e6;
    wide.b = 1e6;
    const ControlSolution sw = solve_constrained_pdas(ReducedProblem(wide, ro), so);
    const ControlSolution su = solve_unconstrained(rp, so);
    const double diff = (sw.u.values - su.u.values).cwiseAbs().maxCoeff() /
                        std::max(1.0, su.u.values.cwiseAbs().maxCoeff());
    out.push_back(upper("pdas-inactive-agreement", diff, 1e-9, "bounds [-1e6, 1e6]"));
  }

  // mesh diagnostics
  {
    const PolygonSpec square = make_polygon({Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)});
    const auto sc = build_family(square, MeshFamilyKind::Superconvergent, 5);
    double worst = 0.0;
    bool verdicts = true;
    for (const auto& mesh : sc) {
      const auto rep = check_h2_irregular(mesh);
      worst = std::max(worst, rep.max_interior_discrepancy / mesh.h);
      verdicts = verdicts && rep.verdict;
    }
    out.push_back({"mesh-superconvergent-square", verdicts && worst <= 1e-12, worst, 1e-12,
                   "max interior discrepancy / h over 5 levels"});

    FamilyOptions fo;
    fo.kappa = 0.2;
    const auto gen = build_family(build_sector_domain(omega1), MeshFamilyKind::Generic, 5, fo);
    bool fails = true, grows = true;
    double prev = 0.0, min_growth = kInf;
    for (std::size_t j = 0; j < gen.size(); ++j) {
      const auto rep = check_h2_irregular(gen[j]);
      if (j >= 2) {
        fails = fails && !rep.verdict;
        min_growth = std::min(min_growth, rep.discrepancy_ratio / prev);
        grows = grows && rep.discrepancy_ratio >= 1.5 * prev;
      }
      prev = rep.discrepancy_ratio;
    }
    out.push_back({"mesh-generic-irregular", fails && grows, min_growth, 1.5,
                   "verdict false from level 2; min ratio growth per level"});
  }

  // flattening near the reentrant corner
  if (omega1 > std::numbers::pi) {
    const Case fine = make_case(omega1, true, opts.flattening_level);
    const ControlProblem cp = make_control_problem(fine.mp, fine.space, fine.target);
    const ControlSolution s = solve_constrained_pdas(ReducedProblem(cp, ro));
    const auto rep = corner_flattening_report(s, cp, fine.space->mesh(), 0, 0.1);
    std::ostringstream os;
    os << rep.at_bound << "/" << rep.nodes << " nodes at the " << rep.bound << " bound, level "
       << opts.flattening_level;
    out.push_back(lower("corner-flattening", rep.fraction, 0.9, os.str()));
  }
  return out;
}

std::vector<CheckResult> quadrature_oracle_report(const CheckOptions& opts) {
  const double omega1 = opts.omega1 > 0.0 ? opts.omega1 : 1.5 * std::numbers::pi;
  std::vector<CheckResult> out;
  for (bool constrained : {false, true}) {
    const Case c = make_case(omega1, constrained, opts.level);
    const P1Space& sp = *c.space;
    const std::string tag = constrained ? "constrained" : "unconstrained";
    const TraceFunction p5 = sp.l2_project_boundary(c.mp.u_field(), 5);
    const TraceFunction p9 = sp.l2_project_boundary(c.mp.u_field(), 9);
    const double rel = sp.l2_norm_boundary(TraceFunction{p5.values - p9.values}) / sp.l2_norm_boundary(p9);
    out.push_back({"projection-" + tag, true, rel, 0.0, "relative L2(Gamma) difference of the control projection"});
    const Eigen::VectorXd l5 = assemble_load(sp.mesh(), c.target.field, 5);
    const Eigen::VectorXd l9 = assemble_load(sp.mesh(), c.target.field, 9);
    out.push_back({"target-load-" + tag, true, (l5 - l9).norm() / l9.norm(), 0.0,
                   "relative difference of the target load vector"});
  }
  return out;
}

}  // namespace dbc
