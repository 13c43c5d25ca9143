#pragma once

#include <functional>
#include <vector>

#include "nch/field.hpp"

namespace nch {

using LinearMap = std::function<Field(const Field&)>;
using ResidualMap = std::function<Field(const Field&)>;
/// (linearization point, direction) -> J(point) * direction
using JacobianApply = std::function<Field(const Field&, const Field&)>;
/// (linearization point, vector) -> approximate J(point)^{-1} * vector
using Preconditioner = std::function<Field(const Field&, const Field&)>;

struct KrylovResult {
  Field solution;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Restarted GMRES with right preconditioning, starting from zero.
KrylovResult gmres(const LinearMap& op, const LinearMap& precond, const Field& rhs,
                   double rel_tol, int max_iter = 300, int restart = 60);

struct NewtonOptions {
  double tol = 1e-11;
  int max_iter = 50;
  double krylov_tol = 1e-12;
  int krylov_max_iter = 300;
};

struct NewtonResult {
  Field solution;
  int iterations = 0;
  /// ||residual||_2 before the first and after every Newton update.
  std::vector<double> residual_history;
  int krylov_iterations = 0;
};

/// Inexact Newton with backtracking on ||residual||_2. Returns u_init
/// untouched (zero iterations) when it already meets the tolerance; throws
/// SolverError carrying the residual history after max_iter updates.
NewtonResult newton_solve(const ResidualMap& residual, const JacobianApply& jacobian,
                          const Preconditioner& preconditioner, const Field& u_init,
                          const NewtonOptions& options);

}  // namespace nch
