#include "zakharov/solvers.hpp"

#include "zakharov/random.hpp"

#include <sstream>

namespace zakharov {

std::vector<SolveReport> multiplicity_search(const ModelParams& p, const OperatorSet& ops,
                                             const Spectrum& spectrum, int k, const SolverConfig& cfg)
{
  p.validate();
  if (p.functional != Functional::Zakharov) {
    throw ValidationError("multiplicity_search applies to the zakharov functional");
  }
  if (k < 1 || static_cast<int>(spectrum.pairs.size()) < k + 1) {
    throw ValidationError("multiplicity_search needs the spectrum up to lambda_{k+1}");
  }
  const double c = p.linear_shift();
  const double lo = spectrum.lambda(k) + threshold_margin(spectrum, k, cfg);
  const double hi = spectrum.lambda(k + 1) - threshold_margin(spectrum, k + 1, cfg);
  if (!(c > lo && c < hi)) {
    std::ostringstream msg;
    msg << "kappa - omegaSq = " << c << " is not inside the window (lambda_" << k << ", lambda_"
        << k + 1 << ") = (" << spectrum.lambda(k) << ", " << spectrum.lambda(k + 1) << ")";
    throw ValidationError(msg.str());
  }

  std::vector<SolveReport> found;
  DeflationSet defl;

  SolveReport ground = mountain_pass_solve(p, ops, spectrum, cfg);
  if (ground.status == SolveStatus::Converged) {
    defl.known.push_back(ground.solution);
    found.push_back(std::move(ground));
  }

  // Seeds near phi_1..phi_k and random combinations of them. Pairing seeds
  // with solutions is heuristic; only the count is meaningful.
  std::vector<Vector> seeds;
  for (int i = 1; i <= k; ++i) {
    seeds.push_back(spectrum.phi(i).values);
  }
  Rng rng(cfg.seed + 101);
  for (int r = 0; r < cfg.random_seeds; ++r) {
    Vector v = Vector::Zero(ops.size());
    for (int i = 1; i <= k; ++i) {
      v += rng.uniform(-1.0, 1.0) * spectrum.phi(i).values;
    }
    seeds.push_back(std::move(v));
  }

  SolverConfig coarse = cfg;
  coarse.tol = 1e-5;
  coarse.max_iterations = 4000;
  for (const Vector& seed : seeds) {
    if (seed.isZero(0.0)) {
      continue;
    }
    // Newton straight from the Nehari projection keeps saddle-type seeds
    // near their own critical point; Nehari descent from such seeds tends to
    // slide down to the ground state.
    const auto t = fibering_root(seed, p, ops);
    Field start(ops.spec(), t ? Vector(*t * seed) : seed);
    SolveReport r = newton_deflated(p, ops, start, defl, cfg);
    if (r.status != SolveStatus::Converged && t) {
      const SolveReport nd = nehari_descent(p, ops, start, coarse);
      r = newton_deflated(p, ops, nd.solution, defl, cfg);
    }
    if (r.status == SolveStatus::Converged) {
      found.push_back(std::move(r));
    }
  }
  return found;
}

} // namespace zakharov
