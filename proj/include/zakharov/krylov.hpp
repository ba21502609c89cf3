#pragma once

#include "zakharov/grid.hpp"

#include <functional>
#include <vector>

namespace zakharov {

using LinearOperator = std::function<Vector(const Vector&)>;

struct MinresResult
{
  Vector x;
  int iterations = 0;
  /// Preconditioned residual norm relative to that of the right-hand side.
  double relative_residual = 0.0;
  bool converged = false;
};

/// Preconditioned MINRES for symmetric (possibly indefinite) `op` with an SPD
/// preconditioner applied as `precond(r) = M^{-1} r`.
MinresResult minres(const LinearOperator& op, const Vector& rhs, const LinearOperator& precond,
                    double rel_tol, int max_iterations);

struct KrylovEigenOptions
{
  int wanted = 6;
  int block_size = 3;
  int max_basis = 240;
  double tol = 1e-9;
  unsigned seed = 7;
};

struct KrylovEigenResult
{
  std::vector<double> values;    ///< ascending
  std::vector<Vector> vectors;   ///< M-orthonormal
  std::vector<double> residuals; ///< |H v - mu M v|_{M^{-1}}
  bool converged = false;
};

/// Smallest eigenvalues of the pencil H v = mu M v with M SPD, using a block
/// Krylov space of M^{-1} H built with full M-orthogonalization and
/// Rayleigh-Ritz extraction. `m_apply` computes M x and `m_solve` M^{-1} x.
/// `expand` generates the next Krylov vector, M^{-1} H x; callers with
/// H = M + K should pass x + M^{-1}(K x), which avoids solving against the
/// large M x component.
KrylovEigenResult smallest_eigenpairs(const LinearOperator& h_apply, const LinearOperator& m_apply,
                                      const LinearOperator& m_solve, const LinearOperator& expand,
                                      int size, const KrylovEigenOptions& opt);

} // namespace zakharov
