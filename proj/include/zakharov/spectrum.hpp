#pragma once

#include "zakharov/grid.hpp"

#include <vector>

namespace zakharov {

/// One pair of the buckling problem A phi = lambda B phi.
///
/// phi is normalized in the X-norm (<A phi, phi> = 1) and its sign is fixed so
/// that the first component above 1e-8 * max|phi| is positive.
struct EigenPair
{
  double lambda = 0.0;
  Field phi;
  /// Relative residual |A phi - lambda B phi|_{X*} / |phi|_X. The Euclidean
  /// residual cannot drop below ~eps / h^4 once phi is rounded to doubles.
  double residual = 0.0;
};

struct Spectrum
{
  DomainSpec spec;
  std::vector<EigenPair> pairs; ///< ascending in lambda

  double lambda(int k) const { return pairs.at(k - 1).lambda; } ///< 1-based
  const Field& phi(int k) const { return pairs.at(k - 1).phi; } ///< 1-based
  /// Smallest relative gap between consecutive eigenvalues (cluster diagnostic).
  double min_relative_gap() const;
};

struct SpectrumOptions
{
  double tol = 1e-10;        ///< relative-residual target per pair, floored at 16 eps / h^2
  int max_iterations = 500;
  bool allow_dense_fallback = true;
  int dense_limit = 2048;    ///< largest node count handled by the dense path
  unsigned seed = 20180325;  ///< start block for the subspace iteration
};

/// Smallest `k_max` generalized eigenpairs via shift-invert subspace
/// iteration on A^{-1} B (solves reuse the factor cached in `ops`), falling back
/// to a dense solve when the iteration stalls and the grid is small enough.
/// Throws SolverError with the residual reached otherwise.
Spectrum solve_spectrum(const OperatorSet& ops, int k_max, const SpectrumOptions& opt = {});

/// Dense generalized solve of the full pencil; used as fallback and in tests.
Spectrum solve_spectrum_dense(const OperatorSet& ops, int k_max);

/// <A u, u> / <B u, u>. Throws ValidationError for u = 0.
double rayleigh_quotient(const Field& u, const OperatorSet& ops);

} // namespace zakharov
