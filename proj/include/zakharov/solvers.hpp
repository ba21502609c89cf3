#pragma once

#include "zakharov/energy.hpp"
#include "zakharov/spectrum.hpp"

#include <string>
#include <vector>

namespace zakharov {

enum class SolveStatus
{
  Converged,
  ZeroCollapse,
  MaxIter
};

std::string to_string(SolveStatus s);

/// Raised when a Zakharov solve is requested at kappa - omega^2 <= lambda_1,
/// where no nonzero critical point exists; callers route these parameters to
/// nonexistence_certificate instead.
class BelowThresholdError : public ValidationError
{
public:
  using ValidationError::ValidationError;
};

struct SolverConfig
{
  /// Convergence: grad_norm <= tol * max(1, |u|_X), grad_norm being the dual
  /// norm |E'(u)|_{X*}.
  double tol = 1e-8;
  int max_iterations = 20000;

  // Mountain pass
  int path_nodes = 41;
  /// Path descent hands over to Newton once the maximizer's gradient norm
  /// falls below this (relative to the same scale as tol).
  double handoff_tol = 1e-4;

  // Newton
  int newton_max_iterations = 60;
  int minres_max_iterations = 2000;

  // Classification
  int morse_m = 6;
  double morse_tol = 1e-6;

  /// |grad u|_{L2} at or below this declares the trivial solution.
  double zero_floor = 1e-6;
  /// Relative X-distance (after sign alignment) below which two solutions
  /// are considered the same.
  double distinct_floor = 0.01;
  /// Threshold comparisons kappa - omega^2 vs lambda_k abstain inside
  /// margin_factor * h^2 * lambda_k.
  double margin_factor = 2.0;

  int random_seeds = 4;
  unsigned seed = 0;
};

struct SolveReport
{
  Field solution;
  double energy = 0.0;
  double grad_norm = 0.0;
  double nehari_res = 0.0;
  int morse_index = 0;
  std::vector<double> morse_eigenvalues;
  int iterations = 0;
  std::vector<double> level_trace;
  SolveStatus status = SolveStatus::MaxIter;
  std::string message;
};

/// Known solutions repelled by deflated Newton, with the shifted deflation
/// operator prod_i (|u - u_i|_X^{-power} + shift). Each known solution is
/// deflated together with its negative since the functionals are even.
struct DeflationSet
{
  std::vector<Field> known;
  double power = 2.0;
  double shift = 1.0;
  /// Deflate the trivial solution as well.
  bool include_trivial = true;

  /// Minimum sign-aligned relative X-distance from u to every known solution.
  double min_relative_distance(const Field& u, const OperatorSet& ops) const;
};

/// min(|u - v|_X, |u + v|_X) / max(|u|_X, |v|_X).
double aligned_distance(const Field& u, const Field& v, const OperatorSet& ops);

/// kappa - omega^2 compared with lambda_k under the h^2 margin of `cfg`.
double threshold_margin(const Spectrum& spectrum, int k, const SolverConfig& cfg);

/// Mountain-pass algorithm on the straight path from 0 to t1 * phi_1 with
/// E(t1 phi_1) < 0: the path maximizer is refined along the path, moved by a
/// Sobolev-gradient step orthogonal to the path, and the path re-discretized
/// when it becomes uneven; the result is polished by Newton. Zakharov
/// requires kappa - omega^2 > lambda_1 (BelowThresholdError otherwise).
SolveReport mountain_pass_solve(const ModelParams& p, const OperatorSet& ops, const Spectrum& spectrum,
                                const SolverConfig& cfg = {});

/// Projected Sobolev-gradient descent on the Nehari set with Armijo
/// backtracking on E(t_v v). Throws ValidationError if u0 has no projection.
SolveReport nehari_descent(const ModelParams& p, const OperatorSet& ops, const Field& u0,
                           const SolverConfig& cfg = {});

/// Newton on E'(u) = 0 with the residual deflated by `defl`; each step solves
/// the Hessian system by preconditioned MINRES (preconditioner: the
/// bilaplacian) with a Tikhonov-shifted retry. A converged nonzero solution
/// is appended to `defl`.
SolveReport newton_deflated(const ModelParams& p, const OperatorSet& ops, const Field& u0,
                            DeflationSet& defl, const SolverConfig& cfg = {});

/// Distinct nonzero solutions in the window lambda_k < kappa - omega^2 <
/// lambda_{k+1}: mountain pass, then Nehari descent plus deflated Newton from
/// phi_1..phi_k and random combinations. Best effort; the count found is the
/// size of the result.
std::vector<SolveReport> multiplicity_search(const ModelParams& p, const OperatorSet& ops,
                                             const Spectrum& spectrum, int k,
                                             const SolverConfig& cfg = {});

struct NegativityScan
{
  bool certified = false;
  double min_ratio = 0.0; ///< min over t of E2(t phi_1) / t^2
  double t_at_min = 0.0;
};

struct E2Report
{
  SolveReport best;
  NegativityScan negativity;
  int starts = 0;
};

/// E2(t phi_1) / t^2 on a geometric t-grid.
NegativityScan negativity_scan(const ModelParams& p, const OperatorSet& ops, const Field& phi1);

/// Multi-start descent + Newton polish for the Approx2 functional; returns
/// the lowest critical point found (the zero field if nothing lower exists).
E2Report global_minimize_e2(const ModelParams& p, const OperatorSet& ops, const Spectrum& spectrum,
                            const SolverConfig& cfg = {});

enum class CertificateVerdict
{
  Passed,
  Abstained,
  Violated
};

std::string to_string(CertificateVerdict v);

struct NonexistenceCertificate
{
  CertificateVerdict verdict = CertificateVerdict::Abstained;
  double shift = 0.0;   ///< kappa - omega^2
  double lambda1 = 0.0;
  double margin = 0.0;
  std::string threshold_check; ///< "below", "borderline" or "above"
  int trials = 0;
  int descent_collapse_count = 0;
  int projection_absent_count = 0;
  /// Nonzero critical points reached below threshold; empty unless Violated.
  std::vector<Field> violations;
  std::string message;
};

/// Numerical evidence for the nonexistence clause: the threshold test, then
/// `trials` random-start Sobolev descents that must collapse to zero and the
/// same directions' fibering projections that must be absent.
NonexistenceCertificate nonexistence_certificate(const ModelParams& p, const OperatorSet& ops,
                                                 const Spectrum& spectrum, int trials,
                                                 const SolverConfig& cfg = {});

struct MorseResult
{
  int index = 0;
  std::vector<double> eigenvalues; ///< smallest m of H v = mu A v
  std::vector<Vector> eigenvectors; ///< A-orthonormal, matching eigenvalues
  bool converged = false;
};

/// Negative eigenvalues among the m smallest of the Hessian pencil (H, A).
/// Throws SolverError if the eigensolver does not converge.
MorseResult morse_analysis(const Field& u, const ModelParams& p, const OperatorSet& ops, int m,
                           double tol_ev = 1e-6);
int morse_index(const Field& u, const ModelParams& p, const OperatorSet& ops, int m = 6);

/// Fills energy, gradient norm, Nehari value, Morse data and status for u.
SolveReport summarize(const Field& u, const ModelParams& p, const OperatorSet& ops,
                      const SolverConfig& cfg);

} // namespace zakharov
