#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "dbc/control.hpp"
#include "dbc/errors.hpp"

namespace dbc {

namespace {

void fill_solution(const ReducedProblem& rp, ControlSolution& s) {
  s.y = rp.state(s.u);
  s.phi = rp.adjoint(s.y);
  s.objective_value = rp.objective(s.u);
}

// gradient with the sign conditions of the box applied at the bounds
Eigen::VectorXd projected_gradient(const ControlProblem& p, const TraceFunction& u,
                                   const Eigen::VectorXd& g) {
  Eigen::VectorXd pg = g;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (u.values[i] <= p.a) pg[i] = std::min(g[i], 0.0);
    else if (u.values[i] >= p.b) pg[i] = std::max(g[i], 0.0);
  }
  return pg;
}

}  // namespace

ControlSolution solve_unconstrained(const ReducedProblem& rp, const SolverOptions& opts) {
  if (!rp.problem().unconstrained())
    throw PreconditionError("solve_unconstrained needs infinite bounds");
  const int nb = rp.space().num_boundary();
  ControlSolution s;
  const Eigen::VectorXd g0 = rp.reduced_residual(TraceFunction{Eigen::VectorXd::Zero(nb)}).weak;
  s.u.values = Eigen::VectorXd::Zero(nb);
  if (g0.norm() > 0.0) {
    CgOptions cg;
    cg.tol = opts.tol;
    cg.maxit = opts.cg_maxit;
    const auto op = [&rp](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
      out = rp.apply_hessian(TraceFunction{in}).values;
    };
    const CgResult r = cg_solve(op, -g0, rp.hessian_preconditioner(), cg);
    s.u.values = r.x;
    s.cg_iterations = r.iterations;
  }
  s.pdas_iterations = 1;
  fill_solution(rp, s);
  s.residual_norm = rp.stationarity_norm(rp.reduced_residual(s.u).weak);
  if (opts.trace) {
    *opts.trace << "iteration,active_lower,active_upper,residual,objective\n"
                << "1,0,0," << s.residual_norm << "," << s.objective_value << "\n";
  }
  return s;
}

ControlSolution solve_constrained_pdas(const ReducedProblem& rp, const SolverOptions& opts) {
  const ControlProblem& p = rp.problem();
  if (!std::isfinite(p.a) || !std::isfinite(p.b))
    throw PreconditionError("the active set method needs finite bounds");
  const int nb = rp.space().num_boundary();
  const Eigen::VectorXd& weights = rp.space().boundary_weights();
  const Eigen::VectorXd diag = rp.hessian_preconditioner();

  ControlSolution s;
  s.u.values = Eigen::VectorXd::Zero(nb).cwiseMax(p.a).cwiseMin(p.b);
  Eigen::VectorXd g = rp.reduced_residual(s.u).weak;
  const double scale = std::max(rp.stationarity_norm(g), 1e-300);
  // multiplier estimate; zero on the inactive set once a solve has happened
  Eigen::VectorXd mu = -g.cwiseQuotient(weights);

  std::vector<char> state(nb, 0), previous;  // -1 lower, +1 upper, 0 inactive
  if (opts.trace) *opts.trace << "iteration,active_lower,active_upper,residual,objective\n";

  for (int it = 1;; ++it) {
    for (int i = 0; i < nb; ++i) {
      if (p.nu * (s.u.values[i] - p.a) + mu[i] < 0.0) state[i] = -1;
      else if (p.nu * (s.u.values[i] - p.b) + mu[i] > 0.0) state[i] = 1;
      else state[i] = 0;
    }
    if (it > 1 && state == previous) break;
    if (it > opts.maxit) {
      std::ostringstream msg;
      msg << "active set method did not settle within " << opts.maxit << " iterations";
      throw MaxIterationsExceeded(msg.str());
    }
    previous = state;

    std::vector<int> inactive;
    for (int i = 0; i < nb; ++i) {
      if (state[i] < 0) s.u.values[i] = p.a;
      else if (state[i] > 0) s.u.values[i] = p.b;
      else inactive.push_back(i);
    }
    g = rp.reduced_residual(s.u).weak;
    if (!inactive.empty()) {
      const int ni = static_cast<int>(inactive.size());
      Eigen::VectorXd rhs(ni), dinv(ni);
      for (int k = 0; k < ni; ++k) {
        rhs[k] = -g[inactive[k]];
        dinv[k] = diag[inactive[k]];
      }
      const auto op = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(nb);
        for (int k = 0; k < ni; ++k) full[inactive[k]] = in[k];
        const Eigen::VectorXd hv = rp.apply_hessian(TraceFunction{full}).values;
        out.resize(ni);
        for (int k = 0; k < ni; ++k) out[k] = hv[inactive[k]];
      };
      CgOptions cg;
      cg.tol = opts.tol;
      cg.abs_tol = 1e-3 * opts.tol * scale * std::sqrt(weights.minCoeff());
      cg.maxit = opts.cg_maxit;
      const CgResult r = cg_solve(op, rhs, dinv, cg);
      s.cg_iterations += r.iterations;
      for (int k = 0; k < ni; ++k) s.u.values[inactive[k]] += r.x[k];
      g = rp.reduced_residual(s.u).weak;
    }
    s.pdas_iterations = it;
    mu = -g.cwiseQuotient(weights);
    for (int i = 0; i < nb; ++i)
      if (state[i] == 0) mu[i] = 0.0;
    if (opts.trace) {
      const long lower = std::count(state.begin(), state.end(), -1);
      const long upper = std::count(state.begin(), state.end(), 1);
      *opts.trace << it << "," << lower << "," << upper << ","
                  << rp.stationarity_norm(projected_gradient(p, s.u, g)) << "," << rp.objective(s.u)
                  << "\n";
    }
  }

  s.u.values = s.u.values.cwiseMax(p.a).cwiseMin(p.b);
  for (int i = 0; i < nb; ++i) {
    if (state[i] < 0) s.active_lower.push_back(i);
    if (state[i] > 0) s.active_upper.push_back(i);
  }
  fill_solution(rp, s);
  s.residual_norm = rp.stationarity_norm(projected_gradient(p, s.u, rp.reduced_residual(s.u).weak));
  return s;
}

ControlSolution solve(const ReducedProblem& rp, const SolverOptions& opts) {
  return rp.problem().unconstrained() ? solve_unconstrained(rp, opts) : solve_constrained_pdas(rp, opts);
}

double verify_discrete_vi(const ReducedProblem& rp, const ControlSolution& s) {
  const ControlProblem& p = rp.problem();
  const Eigen::VectorXd g = rp.reduced_residual(s.u).weak;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double u = s.u.values[i];
    // an infinite bound contributes the ray direction -e_i or +e_i
    const double lower = std::isfinite(p.a) ? g[i] * (p.a - u) : -g[i];
    const double upper = std::isfinite(p.b) ? g[i] * (p.b - u) : g[i];
    worst = std::min({worst, lower, upper});
  }
  return worst;
}

}  // namespace dbc
