#include "zakharov/solvers.hpp"

#include "descent.hpp"

#include <algorithm>
#include <cmath>

namespace zakharov {

namespace {

struct Deflation
{
  const OperatorSet& ops;
  std::vector<Vector> centres; // known solutions, their negatives, optionally 0
  double power;
  double shift;

  double factor(const Vector& u) const
  {
    double m = 1.0;
    for (const Vector& c : centres) {
      const double d = ops.x_norm(u - c);
      m *= std::pow(d, -power) + shift;
    }
    return m;
  }

  // (grad M . delta) / M
  double log_derivative(const Vector& u, const Vector& delta) const
  {
    double rho = 0.0;
    for (const Vector& c : centres) {
      const Vector diff = u - c;
      const double d2 = ops.x_norm_sq(diff);
      const double d = std::sqrt(d2);
      const double mi = std::pow(d, -power) + shift;
      const double dmi = -power * std::pow(d, -power - 2.0) * ops.dot(ops.apply_bilaplacian(diff), delta);
      rho += dmi / mi;
    }
    return rho;
  }
};

Deflation make_deflation(const OperatorSet& ops, const DeflationSet* defl)
{
  Deflation d{ops, {}, 2.0, 1.0};
  if (defl == nullptr) {
    return d;
  }
  d.power = defl->power;
  d.shift = defl->shift;
  for (const Field& k : defl->known) {
    d.centres.push_back(k.values);
    d.centres.push_back(-k.values);
  }
  if (defl->include_trivial) {
    d.centres.push_back(Vector::Zero(ops.size()));
  }
  return d;
}

} // namespace

namespace detail {

/// Newton iteration shared by the solvers; `defl` may be null.
SolveReport newton_core(const EnergyModel& model, Vector u, const DeflationSet* defl,
                        const SolverConfig& cfg)
{
  const OperatorSet& ops = model.ops();
  const Deflation deflation = make_deflation(ops, defl);
  std::vector<double> trace;
  int it = 0;
  for (; it < cfg.newton_max_iterations; ++it) {
    auto [e, g] = model.energy_and_gradient(u);
    const double gn = ops.dual_norm(g);
    trace.push_back(e);
    const double scale = std::max(1.0, ops.x_norm(u));
    if (std::sqrt(ops.grad_l2_sq(u)) <= cfg.zero_floor) {
      break;
    }
    if (gn <= cfg.tol * scale) {
      // One more undeflated step: convergence is quadratic here, so this
      // takes the residual down to rounding for the price of one solve.
      Vector polished = u + newton_direction(model, u, g, 1e-12, cfg.minres_max_iterations);
      if (ops.dual_norm(model.gradient(polished)) < gn) {
        u = std::move(polished);
      }
      break;
    }
    const double rel = std::clamp(gn / scale, 1e-12, 1e-4);
    Vector step = newton_direction(model, u, g, rel, cfg.minres_max_iterations);
    if (!deflation.centres.empty()) {
      const double denom = 1.0 - deflation.log_derivative(u, step);
      if (denom > 1e-8) {
        step /= denom;
      }
    }
    const double merit = deflation.factor(u) * gn;
    double lambda = 1.0;
    Vector next = u + step;
    for (int bt = 0; bt < 12; ++bt) {
      next = u + lambda * step;
      const double m_next = deflation.factor(next) * ops.dual_norm(model.gradient(next));
      if (std::isfinite(m_next) && m_next < (1.0 - 1e-4 * lambda) * merit) {
        break;
      }
      lambda *= 0.5;
    }
    u = std::move(next);
  }
  SolveReport r = summarize(Field(ops.spec(), u), model.params(), ops, cfg);
  r.iterations = it;
  r.level_trace = std::move(trace);
  if (r.status == SolveStatus::ZeroCollapse) {
    r.message = "iterates collapsed to the trivial solution";
  } else if (r.status == SolveStatus::MaxIter) {
    r.message = "Newton did not reach the gradient tolerance";
  }
  return r;
}

} // namespace detail

SolveReport newton_deflated(const ModelParams& p, const OperatorSet& ops, const Field& u0,
                            DeflationSet& defl, const SolverConfig& cfg)
{
  p.validate();
  if (u0.values.size() != ops.size()) {
    throw ValidationError("initial guess does not match the operator grid");
  }
  if (u0.values.isZero(0.0)) {
    throw ValidationError("newton_deflated needs a nonzero initial guess");
  }
  const EnergyModel model(ops, p);
  SolveReport r = detail::newton_core(model, u0.values, &defl, cfg);
  if (r.status == SolveStatus::Converged) {
    if (defl.min_relative_distance(r.solution, ops) < cfg.distinct_floor) {
      r.status = SolveStatus::ZeroCollapse;
      r.message = "converged to an already deflated solution";
    } else {
      defl.known.push_back(r.solution);
    }
  }
  return r;
}

} // namespace zakharov
