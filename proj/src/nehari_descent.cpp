#include "zakharov/solvers.hpp"

#include "descent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace zakharov {

namespace {

std::optional<double> project(const Vector& v, const ModelParams& p, const OperatorSet& ops, double guess)
{
  if (p.functional == Functional::Approx2) {
    const FiberingResult r = fibering_project(Field(ops.spec(), v), p, ops);
    return r.t_root;
  }
  return fibering_root(v, p, ops, guess);
}

} // namespace

SolveReport nehari_descent(const ModelParams& p, const OperatorSet& ops, const Field& u0,
                           const SolverConfig& cfg)
{
  p.validate();
  if (u0.values.size() != ops.size() || u0.values.isZero(0.0)) {
    throw ValidationError("nehari_descent needs a nonzero initial field on the operator grid");
  }
  const EnergyModel model(ops, p);
  const auto t0 = project(u0.values, p, ops, 1.0);
  if (!t0) {
    throw ValidationError("initial field has no Nehari projection (h_value >= 0)");
  }
  Vector u = *t0 * u0.values;

  std::vector<double> trace;
  double alpha = 1.0;
  int it = 0;
  int restarts = 0;
  double handoff = cfg.handoff_tol;
  for (; it < cfg.max_iterations; ++it) {
    const auto [e, g] = model.energy_and_gradient(u);
    trace.push_back(e);
    const Vector w = ops.sobolev(g);
    const double gn2 = std::max(0.0, ops.dot(g, w));
    const double scale = std::max(1.0, ops.x_norm(u));
    if (std::sqrt(gn2) <= cfg.tol * scale) {
      break;
    }
    // Energy differences near the minimum drop to rounding long before the
    // gradient reaches tol; Newton finishes from inside the basin. Minima on
    // the Nehari set have index one; a nearby saddle is not accepted.
    if (std::sqrt(gn2) <= handoff * scale) {
      const SolveReport polished = detail::newton_core(model, u, nullptr, cfg);
      if (polished.status == SolveStatus::Converged && polished.morse_index <= 1 &&
          aligned_distance(polished.solution, Field(ops.spec(), u), ops) <= 10.0 * handoff) {
        trace.insert(trace.end(), polished.level_trace.begin(), polished.level_trace.end());
        u = polished.solution.values;
        break;
      }
      handoff *= 0.01;
    }
    // The derivative of v -> E(t_v v) at a Nehari point equals E'(u).
    alpha = std::min(4.0, 2.0 * alpha);
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Vector v = u - alpha * w;
      const auto t = project(v, p, ops, 1.0);
      if (!t) {
        // projection lost: the step left the cone where the Nehari set is reachable
        ++restarts;
        alpha *= 0.5;
        continue;
      }
      Vector candidate = *t * v;
      const double ec = model.energy(candidate);
      // Below ~sqrt(eps) relative gradient the energy decrease is lost in
      // rounding; accept steps that do not increase E beyond that noise.
      const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(e);
      const bool roundoff_regime = alpha * gn2 <= noise * 1e4;
      if (ec <= e - 1e-4 * alpha * gn2 || (roundoff_regime && ec <= e + noise)) {
        u = std::move(candidate);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      break;
    }
  }

  SolveReport r = summarize(Field(ops.spec(), u), p, ops, cfg);
  r.iterations = it;
  r.level_trace = std::move(trace);
  if (restarts > 0) {
    r.message = "projection lost " + std::to_string(restarts) + " time(s); step halved";
  }
  if (r.status == SolveStatus::MaxIter && r.message.empty()) {
    r.message = "Nehari descent stopped before reaching the gradient tolerance";
  }
  return r;
}

} // namespace zakharov
