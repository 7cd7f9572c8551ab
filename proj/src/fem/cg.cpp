#include <cmath>
#include <sstream>

#include "dbc/errors.hpp"
#include "dbc/fem.hpp"

namespace dbc {

CgResult cg_solve(const LinearOperator& op, const Eigen::VectorXd& b,
                  const Eigen::VectorXd& jacobi_diagonal, const CgOptions& options,
                  const Eigen::VectorXd* initial_guess) {
  const Eigen::Index n = b.size();
  CgResult res;
  res.x = initial_guess ? *initial_guess : Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0 && !initial_guess) return res;

  const Eigen::VectorXd inv_diag = jacobi_diagonal.cwiseInverse();
  Eigen::VectorXd r(n), ap(n);
  op(res.x, ap);
  r = b - ap;
  const double target = std::max(options.tol * bnorm, options.abs_tol);
  double rnorm = r.norm();
  if (rnorm <= target) {
    res.relative_residual = bnorm > 0.0 ? rnorm / bnorm : rnorm;
    return res;
  }
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= options.maxit; ++it) {
    op(p, ap);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) {
      std::ostringstream msg;
      msg << "conjugate gradients: operator not positive definite (p'Ap = " << pap << ")";
      throw SolverDivergence(msg.str());
    }
    const double alpha = rz / pap;
    res.x += alpha * p;
    r -= alpha * ap;
    rnorm = r.norm();
    res.iterations = it;
    if (rnorm <= target) {
      res.relative_residual = bnorm > 0.0 ? rnorm / bnorm : rnorm;
      return res;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  std::ostringstream msg;
  msg << "conjugate gradients: residual " << rnorm / std::max(bnorm, 1e-300) << " after "
      << options.maxit << " iterations";
  throw SolverDivergence(msg.str());
}

CgResult cg_solve(const SparseSymOperator& op, const Eigen::VectorXd& b, const CgOptions& options) {
  const auto& a = op.matrix();
  return cg_solve([&a](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out.noalias() = a * in; },
                  b, op.diagonal(), options);
}

}  // namespace dbc
