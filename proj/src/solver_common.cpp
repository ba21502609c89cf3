#include "zakharov/solvers.hpp"

#include "zakharov/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace zakharov {

std::string to_string(SolveStatus s)
{
  switch (s) {
    case SolveStatus::Converged:
      return "Converged";
    case SolveStatus::ZeroCollapse:
      return "ZeroCollapse";
    case SolveStatus::MaxIter:
      return "MaxIter";
  }
  return "unknown";
}

std::string to_string(CertificateVerdict v)
{
  switch (v) {
    case CertificateVerdict::Passed:
      return "passed";
    case CertificateVerdict::Abstained:
      return "abstained";
    case CertificateVerdict::Violated:
      return "violated";
  }
  return "unknown";
}

double aligned_distance(const Field& u, const Field& v, const OperatorSet& ops)
{
  const double nu = ops.x_norm(u.values);
  const double nv = ops.x_norm(v.values);
  const double denom = std::max(nu, nv);
  if (denom == 0.0) {
    return 0.0;
  }
  const double minus = ops.x_norm(u.values - v.values);
  const double plus = ops.x_norm(u.values + v.values);
  return std::min(minus, plus) / denom;
}

double DeflationSet::min_relative_distance(const Field& u, const OperatorSet& ops) const
{
  double d = std::numeric_limits<double>::infinity();
  for (const Field& k : known) {
    d = std::min(d, aligned_distance(u, k, ops));
  }
  return d;
}

double threshold_margin(const Spectrum& spectrum, int k, const SolverConfig& cfg)
{
  const DomainSpec& s = spectrum.spec;
  double h = 0.0;
  for (int a = 0; a < s.dimension; ++a) {
    h = std::max(h, s.spacing(a));
  }
  return cfg.margin_factor * h * h * spectrum.lambda(k);
}

MorseResult morse_analysis(const Field& u, const ModelParams& p, const OperatorSet& ops, int m,
                           double tol_ev)
{
  if (m < 1) {
    throw ValidationError("morse_index: m must be positive");
  }
  const EnergyModel model(ops, p);
  const Vector base = u.values;
  KrylovEigenOptions opt;
  opt.wanted = m;
  opt.tol = tol_ev;
  const auto res = smallest_eigenpairs(
    [&](const Vector& v) { return model.hess_vec(base, v); },
    [&](const Vector& v) { return ops.apply_bilaplacian(v); },
    [&](const Vector& v) { return ops.solve_bilaplacian(v); },
    [&](const Vector& v) {
      return Vector(v + ops.solve_bilaplacian(model.hess_vec(base, v) - ops.apply_bilaplacian(v)));
    },
    ops.size(), opt);
  if (!res.converged) {
    std::ostringstream msg;
    msg << "Hessian eigensolver did not converge; residuals:";
    for (double r : res.residuals) {
      msg << ' ' << r;
    }
    throw SolverError(msg.str());
  }
  MorseResult out;
  out.converged = true;
  out.eigenvalues = res.values;
  out.eigenvectors = res.vectors;
  out.index = static_cast<int>(
    std::count_if(res.values.begin(), res.values.end(), [&](double mu) { return mu < -tol_ev; }));
  return out;
}

int morse_index(const Field& u, const ModelParams& p, const OperatorSet& ops, int m)
{
  return morse_analysis(u, p, ops, m).index;
}

SolveReport summarize(const Field& u, const ModelParams& p, const OperatorSet& ops,
                      const SolverConfig& cfg)
{
  const EnergyModel model(ops, p);
  SolveReport r;
  r.solution = u;
  const auto [e, g] = model.energy_and_gradient(u.values);
  r.energy = e;
  r.grad_norm = ops.dual_norm(g);
  r.nehari_res = ops.dot(g, u.values);
  const double scale = std::max(1.0, ops.x_norm(u.values));
  const double grad_l2 = std::sqrt(ops.grad_l2_sq(u.values));
  if (grad_l2 <= cfg.zero_floor) {
    r.status = SolveStatus::ZeroCollapse;
  } else if (r.grad_norm <= cfg.tol * scale) {
    r.status = SolveStatus::Converged;
  } else {
    r.status = SolveStatus::MaxIter;
  }
  if (r.status == SolveStatus::Converged) {
    const MorseResult mr = morse_analysis(u, p, ops, cfg.morse_m, cfg.morse_tol);
    r.morse_index = mr.index;
    r.morse_eigenvalues = mr.eigenvalues;
  }
  return r;
}

} // namespace zakharov
