#pragma once

#include "zakharov/energy.hpp"
#include "zakharov/solvers.hpp"

#include <functional>
#include <vector>

namespace zakharov::detail {

struct DescentResult
{
  Vector u;
  double energy = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool stopped = false; ///< `stop` accepted the iterate
  std::vector<double> trace;
};

/// Sobolev-gradient descent u <- u - alpha A^{-1} E'(u) with Armijo
/// backtracking. Runs until `stop(u, grad_norm)` holds, the step stagnates,
/// or `max_iterations` is reached.
DescentResult sobolev_descent(const EnergyModel& model, Vector u, int max_iterations,
                              const std::function<bool(const Vector&, double)>& stop);

/// One Newton direction: solves H(u) d = -g by MINRES preconditioned with
/// the bilaplacian, retrying with H + tau A for growing tau if needed.
Vector newton_direction(const EnergyModel& model, const Vector& u, const Vector& g, double rel_tol,
                        int max_iterations);

/// Newton on E'(u) = 0 from u, deflated by `defl` when non-null.
SolveReport newton_core(const EnergyModel& model, Vector u, const DeflationSet* defl,
                        const SolverConfig& cfg);

} // namespace zakharov::detail
