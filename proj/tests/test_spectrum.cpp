#include "oracles.hpp"

#include "zakharov/krylov.hpp"
#include "zakharov/random.hpp"
#include "zakharov/spectrum.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

namespace zakharov {
namespace {

using oracle::pi;

DomainSpec line(int n, BoundaryKind bc = BoundaryKind::Navier, double L = pi)
{
  DomainSpec d;
  d.n = n;
  d.extents = {L};
  d.bc = bc;
  return d;
}

TEST(Spectrum, NavierMatchesDiscreteSineModes)
{
  const OperatorSet ops(line(1024));
  const Spectrum s = solve_spectrum(ops, 4);
  ASSERT_EQ(s.pairs.size(), 4u);
  for (int k = 1; k <= 4; ++k) {
    const double exact = oracle::navier_discrete_lambda(k, 1024, pi);
    EXPECT_NEAR(s.lambda(k), exact, 1e-10 * exact) << "k=" << k;
    // lambda_k / k^2 = 1 - k^2 h^2 / 12 + O(h^4)
    EXPECT_NEAR(s.lambda(k), k * k, 1.5e-6 * std::pow(k, 4)) << "k=" << k;
    const double h = pi / 1025;
    EXPECT_LE(s.pairs[k - 1].residual, std::max(1e-10, 16 * 2.220446049250313e-16 / (h * h)));
  }
}

TEST(Spectrum, ScalesWithIntervalLength)
{
  for (double L : {1.0, pi, 2.0 * pi}) {
    const OperatorSet ops(line(255, BoundaryKind::Navier, L));
    const Spectrum s = solve_spectrum(ops, 3);
    for (int k = 1; k <= 3; ++k) {
      EXPECT_NEAR(s.lambda(k), oracle::navier_discrete_lambda(k, 255, L), 1e-9 * s.lambda(k));
      const double cont = std::pow(k * pi / L, 2);
      EXPECT_NEAR(s.lambda(k), cont, 1e-3 * cont);
    }
  }
}

TEST(Spectrum, EigenfunctionsAreSines)
{
  const OperatorSet ops(line(511));
  const Spectrum s = solve_spectrum(ops, 3);
  for (int k = 1; k <= 3; ++k) {
    Vector ref = sample(ops.spec(), [k](double x) { return std::sin(k * x); });
    ref /= ops.x_norm(ref);
    const Vector& phi = s.phi(k).values;
    EXPECT_LE(std::min((phi - ref).norm(), (phi + ref).norm()), 1e-8 * ref.norm());
  }
}

TEST(Spectrum, NormalizationOrthogonalityAndSign)
{
  for (const DomainSpec& d : {line(300), line(300, BoundaryKind::Dirichlet)}) {
    const OperatorSet ops(d);
    const Spectrum s = solve_spectrum(ops, 5);
    for (int i = 0; i < 5; ++i) {
      const Vector& a = s.pairs[i].phi.values;
      EXPECT_NEAR(ops.x_norm_sq(a), 1.0, 1e-10);
      const double big = a.cwiseAbs().maxCoeff();
      for (int j = 0; j < a.size(); ++j) {
        if (std::abs(a[j]) > 1e-8 * big) {
          EXPECT_GT(a[j], 0.0);
          break;
        }
      }
      for (int j = 0; j < i; ++j) {
        EXPECT_LE(std::abs(ops.dot(ops.laplacian() * a, s.pairs[j].phi.values)), 1e-10 * s.pairs[i].lambda);
      }
      if (i > 0) {
        EXPECT_LT(s.pairs[i - 1].lambda, s.pairs[i].lambda);
      }
    }
  }
}

TEST(Spectrum, ClampedFirstEigenvalueConverges)
{
  // 1 - cos 2x is the clamped buckling mode on (0, pi): u'''' = 4 (-u'').
  std::array<double, 3> lam{};
  int i = 0;
  for (int n : {127, 255, 511}) {
    lam[i++] = solve_spectrum(OperatorSet(line(n, BoundaryKind::Dirichlet)), 1).lambda(1);
  }
  EXPECT_NEAR(lam[2], 4.0, 1e-3);
  const double p = std::log2(std::abs(lam[0] - 4.0) / std::abs(lam[1] - 4.0));
  EXPECT_NEAR(p, 2.0, 0.2);
}

TEST(Spectrum, SquareFirstEigenvalue)
{
  DomainSpec d;
  d.dimension = 2;
  d.extents = {pi, pi};
  d.n = 48;
  const Spectrum s = solve_spectrum(OperatorSet(d), 3);
  EXPECT_NEAR(s.lambda(1), 2.0, 5e-3);
  // lambda_2 = lambda_3 = 5 in the continuum (modes (1,2), (2,1)).
  EXPECT_NEAR(s.lambda(2), 5.0, 2e-2);
  EXPECT_NEAR(s.lambda(3), 5.0, 2e-2);
}

TEST(Spectrum, IterativeAgreesWithDense)
{
  for (const DomainSpec& d : {line(200), line(200, BoundaryKind::Dirichlet)}) {
    const OperatorSet ops(d);
    const Spectrum a = solve_spectrum(ops, 4);
    const Spectrum b = solve_spectrum_dense(ops, 4);
    for (int k = 1; k <= 4; ++k) {
      // The dense pencil solve carries eps * cond(A) ~ eps / h^4 rounding.
      EXPECT_NEAR(a.lambda(k), b.lambda(k), 1e-7 * b.lambda(k));
    }
  }
}

TEST(Spectrum, Deterministic)
{
  const OperatorSet ops(line(400, BoundaryKind::Dirichlet));
  const Spectrum a = solve_spectrum(ops, 4);
  const Spectrum b = solve_spectrum(ops, 4);
  for (int k = 1; k <= 4; ++k) {
    EXPECT_EQ(a.lambda(k), b.lambda(k));
    EXPECT_EQ(a.phi(k).values, b.phi(k).values);
  }
}

TEST(RayleighQuotient, MinimizedByFirstMode)
{
  const OperatorSet ops(line(256));
  const Spectrum s = solve_spectrum(ops, 2);
  EXPECT_NEAR(rayleigh_quotient(s.phi(1), ops), s.lambda(1), 1e-10);
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Field u(ops.spec(), random_smooth_field(ops.spec(), rng, 8, 0.1));
    EXPECT_GE(rayleigh_quotient(u, ops), s.lambda(1) - 1e-10);
  }
  EXPECT_THROW(rayleigh_quotient(Field::zeros(ops.spec()), ops), ValidationError);
}

TEST(RayleighQuotient, QuadraticInPerturbation)
{
  const OperatorSet ops(line(256));
  const Spectrum s = solve_spectrum(ops, 2);
  std::vector<double> dev;
  for (double eps : {1e-2, 5e-3, 2.5e-3}) {
    const Field u(ops.spec(), s.phi(1).values + eps * s.phi(2).values);
    dev.push_back(rayleigh_quotient(u, ops) - s.lambda(1));
  }
  for (int i = 0; i + 1 < 3; ++i) {
    const double p = std::log2(dev[i] / dev[i + 1]);
    EXPECT_GE(p, 1.9);
    EXPECT_LE(p, 2.1);
  }
}

TEST(Krylov, SmallestEigenpairsMatchDensePencil)
{
  // H = M + K with K diagonal and indefinite, M the bilaplacian.
  const OperatorSet ops(line(120));
  const Eigen::MatrixXd A = Eigen::MatrixXd(ops.bilaplacian());
  Vector kd = Vector::LinSpaced(120, -3.0, 2.0);
  const Eigen::MatrixXd H = A + Eigen::MatrixXd(kd.asDiagonal());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ref(H, A);

  KrylovEigenOptions opt;
  opt.wanted = 4;
  opt.tol = 1e-8;
  const auto res = smallest_eigenpairs(
    [&](const Vector& x) { return Vector(H * x); }, [&](const Vector& x) { return Vector(A * x); },
    [&](const Vector& x) { return ops.solve_bilaplacian(x); },
    [&](const Vector& x) { return Vector(x + ops.solve_bilaplacian(kd.cwiseProduct(x))); }, 120, opt);
  ASSERT_TRUE(res.converged);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(res.values[i], ref.eigenvalues()[i], 1e-7 * (1.0 + std::abs(ref.eigenvalues()[i])));
  }
}

TEST(Minres, SolvesIndefiniteSystem)
{
  const OperatorSet ops(line(100));
  const Eigen::MatrixXd A = Eigen::MatrixXd(ops.bilaplacian());
  const Eigen::MatrixXd H = A - 2.5 * Eigen::MatrixXd(ops.laplacian());
  const Vector b = Vector::LinSpaced(100, 1.0, -1.0);
  const auto r = minres([&](const Vector& x) { return Vector(H * x); }, b,
                        [&](const Vector& x) { return ops.solve_bilaplacian(x); }, 1e-12, 500);
  ASSERT_TRUE(r.converged);
  const Vector ref = H.fullPivLu().solve(b);
  EXPECT_LE((r.x - ref).norm(), 1e-8 * ref.norm());
}

} // namespace
} // namespace zakharov
