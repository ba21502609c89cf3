#include "descent.hpp"

#include "zakharov/krylov.hpp"

#include <algorithm>
#include <cmath>

namespace zakharov::detail {

DescentResult sobolev_descent(const EnergyModel& model, Vector u, int max_iterations,
                              const std::function<bool(const Vector&, double)>& stop)
{
  const OperatorSet& ops = model.ops();
  DescentResult r;
  double alpha = 1.0;
  auto [e, g] = model.energy_and_gradient(u);
  for (int it = 0; it <= max_iterations; ++it) {
    const Vector w = ops.sobolev(g);
    const double gn2 = std::max(0.0, ops.dot(g, w));
    r.iterations = it;
    r.energy = e;
    r.grad_norm = std::sqrt(gn2);
    r.trace.push_back(e);
    if (stop(u, r.grad_norm)) {
      r.stopped = true;
      break;
    }
    if (it == max_iterations) {
      break;
    }
    alpha = std::min(1.0, 2.0 * alpha);
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      Vector trial = u - alpha * w;
      auto [et, gt] = model.energy_and_gradient(trial);
      if (std::isfinite(et) && et <= e - 1e-4 * alpha * gn2) {
        u = std::move(trial);
        e = et;
        g = std::move(gt);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      break;
    }
  }
  r.u = std::move(u);
  return r;
}

Vector newton_direction(const EnergyModel& model, const Vector& u, const Vector& g, double rel_tol,
                        int max_iterations)
{
  const OperatorSet& ops = model.ops();
  const Vector rhs = -g;
  auto precond = [&](const Vector& r) { return ops.solve_bilaplacian(r); };
  MinresResult best;
  best.relative_residual = INFINITY;
  for (double tau : {0.0, 1e-6, 1e-4, 1e-2, 1e-1, 1.0}) {
    auto op = [&](const Vector& v) {
      Vector hv = model.hess_vec(u, v);
      if (tau > 0.0) {
        hv += tau * ops.apply_bilaplacian(v);
      }
      return hv;
    };
    MinresResult res = minres(op, rhs, precond, rel_tol, max_iterations);
    if (res.converged) {
      return res.x;
    }
    if (res.relative_residual < best.relative_residual) {
      best = std::move(res);
    }
  }
  return best.x;
}

} // namespace zakharov::detail
