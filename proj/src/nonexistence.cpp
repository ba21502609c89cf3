#include "zakharov/solvers.hpp"

#include "descent.hpp"
#include "zakharov/random.hpp"

#include <cmath>
#include <sstream>

namespace zakharov {

NonexistenceCertificate nonexistence_certificate(const ModelParams& p, const OperatorSet& ops,
                                                 const Spectrum& spectrum, int trials,
                                                 const SolverConfig& cfg)
{
  p.validate();
  if (p.functional != Functional::Zakharov) {
    throw ValidationError("nonexistence_certificate applies to the zakharov functional");
  }
  if (trials < 0) {
    throw ValidationError("trials must be non-negative");
  }
  NonexistenceCertificate cert;
  cert.shift = p.linear_shift();
  cert.lambda1 = spectrum.lambda(1);
  cert.margin = threshold_margin(spectrum, 1, cfg);
  if (cert.shift > cert.lambda1 + cert.margin) {
    cert.threshold_check = "above";
    cert.verdict = CertificateVerdict::Abstained;
    cert.message = "kappa - omegaSq exceeds lambda_1: nonzero solutions exist";
    return cert;
  }
  if (cert.shift >= cert.lambda1 - cert.margin) {
    cert.threshold_check = "borderline";
    cert.verdict = CertificateVerdict::Abstained;
    std::ostringstream msg;
    msg << "|kappa - omegaSq - lambda_1| = " << std::abs(cert.shift - cert.lambda1)
        << " is below the grid resolution margin " << cert.margin;
    cert.message = msg.str();
    return cert;
  }
  cert.threshold_check = "below";

  const EnergyModel model(ops, p);
  Rng rng(cfg.seed + 303);
  cert.trials = trials;
  for (int i = 0; i < trials; ++i) {
    const Vector u0 = rng.uniform(0.5, 5.0) * random_smooth_field(ops.spec(), rng);
    if (u0.isZero(0.0)) {
      continue;
    }
    const Field start(ops.spec(), u0);
    if (!fibering_project(start, p, ops).t_root) {
      ++cert.projection_absent_count;
    }
    const auto d = detail::sobolev_descent(model, u0, cfg.max_iterations, [&](const Vector& u, double gn) {
      const double grad_l2 = std::sqrt(ops.grad_l2_sq(u));
      const bool collapsed = grad_l2 <= 1e-8;
      const bool nonzero_critical = grad_l2 > cfg.zero_floor && gn <= cfg.tol * std::max(1.0, ops.x_norm(u));
      return collapsed || nonzero_critical;
    });
    if (std::sqrt(ops.grad_l2_sq(d.u)) <= 1e-8) {
      ++cert.descent_collapse_count;
    } else if (d.stopped) {
      cert.violations.emplace_back(ops.spec(), d.u);
    }
  }

  if (!cert.violations.empty()) {
    cert.verdict = CertificateVerdict::Violated;
    cert.message = "descent reached a nonzero critical point below threshold";
  } else if (cert.descent_collapse_count == trials && cert.projection_absent_count == trials) {
    cert.verdict = CertificateVerdict::Passed;
  } else {
    cert.verdict = CertificateVerdict::Abstained;
    cert.message = "some descents neither collapsed nor converged";
  }
  return cert;
}

} // namespace zakharov
