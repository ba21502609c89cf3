#include "zakharov/solvers.hpp"

#include "descent.hpp"
#include "zakharov/random.hpp"

#include <cmath>
#include <limits>

namespace zakharov {

NegativityScan negativity_scan(const ModelParams& p, const OperatorSet& ops, const Field& phi1)
{
  p.validate();
  if (p.functional != Functional::Approx2) {
    throw ValidationError("negativity_scan applies to the approx2 functional");
  }
  const EnergyModel model(ops, p);
  NegativityScan out;
  out.min_ratio = std::numeric_limits<double>::infinity();
  const double ratio = std::pow(10.0, 1.0 / 400.0);
  for (double t = 1e-3; t <= 1e3; t *= ratio) {
    const double q = model.energy(t * phi1.values) / (t * t);
    if (q < out.min_ratio) {
      out.min_ratio = q;
      out.t_at_min = t;
    }
  }
  out.certified = out.min_ratio < 0.0;
  return out;
}

E2Report global_minimize_e2(const ModelParams& p, const OperatorSet& ops, const Spectrum& spectrum,
                            const SolverConfig& cfg)
{
  p.validate();
  if (p.functional != Functional::Approx2) {
    throw ValidationError("global_minimize_e2 applies to the approx2 functional");
  }
  const EnergyModel model(ops, p);
  E2Report out;
  const Field& phi1 = spectrum.phi(1);
  out.negativity = negativity_scan(p, ops, phi1);

  std::vector<Vector> seeds;
  const double t = out.negativity.t_at_min;
  for (double f : {1.0, 0.5, 2.0}) {
    seeds.push_back(f * t * phi1.values);
  }
  Rng rng(cfg.seed + 202);
  for (int r = 0; r < cfg.random_seeds; ++r) {
    seeds.push_back(rng.uniform(0.5, 3.0) * random_smooth_field(ops.spec(), rng));
  }

  out.best = summarize(Field::zeros(ops.spec()), p, ops, cfg);
  out.best.message = "no start descended below the trivial solution";
  for (const Vector& seed : seeds) {
    ++out.starts;
    const auto d = detail::sobolev_descent(model, seed, cfg.max_iterations, [&](const Vector& u, double gn) {
      return gn <= 1e-6 * std::max(1.0, ops.x_norm(u)) || std::sqrt(ops.grad_l2_sq(u)) <= cfg.zero_floor;
    });
    if (std::sqrt(ops.grad_l2_sq(d.u)) <= cfg.zero_floor) {
      continue;
    }
    SolveReport r = detail::newton_core(model, d.u, nullptr, cfg);
    r.level_trace.insert(r.level_trace.begin(), d.trace.begin(), d.trace.end());
    r.iterations += d.iterations;
    if (r.status == SolveStatus::Converged && r.energy < out.best.energy) {
      out.best = std::move(r);
    }
  }
  return out;
}

} // namespace zakharov
