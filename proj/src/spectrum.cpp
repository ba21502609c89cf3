#include "zakharov/spectrum.hpp"

#include "zakharov/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace zakharov {

namespace {

double relative_residual(const OperatorSet& ops, const Vector& x, double lambda)
{
  const Vector r = ops.apply_bilaplacian(x) - lambda * (ops.laplacian() * x);
  return ops.dual_norm(r) / ops.x_norm(x);
}

void fix_sign(Vector& v)
{
  const double cutoff = 1e-8 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > cutoff) {
      if (v[i] < 0) {
        v = -v;
      }
      return;
    }
  }
}

EigenPair make_pair(const OperatorSet& ops, Vector v, double lambda)
{
  v /= ops.x_norm(v);
  fix_sign(v);
  EigenPair p;
  p.lambda = lambda;
  p.residual = relative_residual(ops, v, lambda);
  p.phi = Field(ops.spec(), std::move(v));
  return p;
}

} // namespace

double Spectrum::min_relative_gap() const
{
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    gap = std::min(gap, (pairs[i].lambda - pairs[i - 1].lambda) / pairs[i].lambda);
  }
  return gap;
}

Spectrum solve_spectrum_dense(const OperatorSet& ops, int k_max)
{
  const int N = ops.size();
  if (k_max < 1 || k_max > N) {
    throw ValidationError("k_max must lie in [1, node count]");
  }
  const Eigen::MatrixXd A = Eigen::MatrixXd(ops.bilaplacian());
  const Eigen::MatrixXd B = Eigen::MatrixXd(ops.laplacian());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
  if (es.info() != Eigen::Success) {
    throw SolverError("dense generalized eigensolver failed");
  }
  Spectrum s{ops.spec(), {}};
  for (int k = 0; k < k_max; ++k) {
    s.pairs.push_back(make_pair(ops, es.eigenvectors().col(k), es.eigenvalues()[k]));
  }
  return s;
}

Spectrum solve_spectrum(const OperatorSet& ops, int k_max, const SpectrumOptions& opt)
{
  const int N = ops.size();
  if (k_max < 1 || k_max > N) {
    throw ValidationError("k_max must lie in [1, node count]");
  }
  const int p = std::min(N, std::max(2 * k_max, k_max + 8));
  const Vector w = ops.second_diff_weights().cwiseSqrt();
  const double h = std::min(ops.spacings()[0], ops.spec().dimension == 2 ? ops.spacings()[1] : ops.spacings()[0]);
  const double tol = std::max(opt.tol, 16.0 * std::numeric_limits<double>::epsilon() / (h * h));

  Rng rng(opt.seed);
  Eigen::MatrixXd X(N, p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < N; ++i) {
      X(i, j) = rng.uniform(-1.0, 1.0);
    }
  }

  Eigen::VectorXd theta;
  double worst = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iterations; ++it) {
    Eigen::MatrixXd Y(N, p);
    for (int j = 0; j < p; ++j) {
      Vector y = ops.solve_bilaplacian(ops.laplacian() * X.col(j));
      Y.col(j) = y / y.norm();
    }
    // Projected pencil as Gram matrices of S Y and D Y: symmetric and free
    // of the h^-4 cancellation in A Y.
    const Eigen::MatrixXd SY = w.asDiagonal() * (ops.second_diff() * Y);
    const Eigen::MatrixXd DY = ops.edge_diff() * Y;
    const Eigen::MatrixXd Ar = SY.transpose() * SY;
    const Eigen::MatrixXd Br = DY.transpose() * DY;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> small(Ar, Br);
    if (small.info() != Eigen::Success) {
      break;
    }
    theta = small.eigenvalues();
    X = Y * small.eigenvectors();

    worst = 0.0;
    for (int k = 0; k < k_max; ++k) {
      worst = std::max(worst, relative_residual(ops, X.col(k), theta[k]));
    }
    if (worst <= tol) {
      Spectrum s{ops.spec(), {}};
      for (int k = 0; k < k_max; ++k) {
        s.pairs.push_back(make_pair(ops, X.col(k), theta[k]));
      }
      return s;
    }
  }

  if (opt.allow_dense_fallback && N <= opt.dense_limit) {
    return solve_spectrum_dense(ops, k_max);
  }
  std::ostringstream msg;
  msg << "subspace iteration did not converge: relative residual " << worst << " > " << tol;
  throw SolverError(msg.str());
}

double rayleigh_quotient(const Field& u, const OperatorSet& ops)
{
  if (u.values.size() != ops.size()) {
    throw ValidationError("field does not match operator grid");
  }
  const double den = ops.grad_l2_sq(u.values);
  if (!(den > 0.0)) {
    throw ValidationError("rayleigh quotient of the zero field is undefined");
  }
  return ops.x_norm_sq(u.values) / den;
}

} // namespace zakharov
