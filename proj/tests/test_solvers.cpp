#include "oracles.hpp"

#include "zakharov/random.hpp"
#include "zakharov/solvers.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <thread>

namespace zakharov {
namespace {

using oracle::pi;

DomainSpec line(int n)
{
  DomainSpec d;
  d.n = n;
  return d;
}

ModelParams params(Functional f, double kappa, double omega_sq)
{
  ModelParams p;
  p.functional = f;
  p.kappa = kappa;
  p.omega_sq = omega_sq;
  return p;
}

struct Problem
{
  OperatorSet ops;
  Spectrum spectrum;

  explicit Problem(int n)
    : ops(line(n))
    , spectrum(solve_spectrum(ops, 4))
  {}
};

const Problem& grid256()
{
  static const Problem p(256);
  return p;
}

void expect_critical_point(const SolveReport& r, const ModelParams& p, const OperatorSet& ops,
                           const SolverConfig& cfg)
{
  ASSERT_EQ(r.status, SolveStatus::Converged) << r.message;
  const EnergyModel m(ops, p);
  EXPECT_LE(m.grad_norm(r.solution.values), cfg.tol * std::max(1.0, ops.x_norm(r.solution.values)));
  EXPECT_LE(std::abs(r.nehari_res), 1e-8);
}

TEST(MountainPass, ZakharovGroundState)
{
  const auto& pr = grid256();
  const ModelParams p = params(Functional::Zakharov, 3.5, 1.0);
  const SolverConfig cfg;
  const SolveReport r = mountain_pass_solve(p, pr.ops, pr.spectrum, cfg);
  expect_critical_point(r, p, pr.ops, cfg);
  EXPECT_GT(r.energy, 0.0);
  EXPECT_LT(r.energy, p.kappa * pi / 2);
  EXPECT_GE(r.morse_index, 1);
  const EnergyIdentity id = energy_identity(r.solution, p, pr.ops);
  EXPECT_NEAR(id.value, r.energy, 1e-10 * (1 + r.energy));
  EXPECT_GT(id.value, 0.0);
  EXPECT_LT(id.value, p.kappa * pi / 2);
}

TEST(MountainPass, RefusesBelowThreshold)
{
  const auto& pr = grid256();
  EXPECT_THROW(mountain_pass_solve(params(Functional::Zakharov, 2.0, 1.5), pr.ops, pr.spectrum),
               BelowThresholdError);
}

TEST(MountainPass, Approx1PositiveLevel)
{
  const auto& pr = grid256();
  const ModelParams p = params(Functional::Approx1, 1.0, 5.0);
  const SolverConfig cfg;
  const SolveReport r = mountain_pass_solve(p, pr.ops, pr.spectrum, cfg);
  expect_critical_point(r, p, pr.ops, cfg);
  EXPECT_GT(r.energy, 0.0);
  EXPECT_EQ(r.morse_index, 1);
}

TEST(MountainPass, LeavesSymmetricSaddle)
{
  // The even solution grown from phi_1 has an odd unstable direction here;
  // the mountain-pass level lies below it.
  const auto& pr = grid256();
  const ModelParams p = params(Functional::Approx1, 2.0, 1.5);
  const SolverConfig cfg;
  const SolveReport sym = nehari_descent(p, pr.ops, pr.spectrum.phi(1), cfg);
  ASSERT_EQ(sym.status, SolveStatus::Converged);
  EXPECT_EQ(sym.morse_index, 2);
  const SolveReport mp = mountain_pass_solve(p, pr.ops, pr.spectrum, cfg);
  expect_critical_point(mp, p, pr.ops, cfg);
  EXPECT_EQ(mp.morse_index, 1);
  EXPECT_LT(mp.energy, sym.energy);
}

TEST(MountainPass, Deterministic)
{
  const auto& pr = grid256();
  const ModelParams p = params(Functional::Zakharov, 3.5, 1.0);
  const SolveReport a = mountain_pass_solve(p, pr.ops, pr.spectrum);
  const SolveReport b = mountain_pass_solve(p, pr.ops, pr.spectrum);
  EXPECT_EQ(a.level_trace, b.level_trace);
  EXPECT_EQ(a.solution.values, b.solution.values);
}

TEST(MountainPass, ConcurrentRunsAgree)
{
  const auto& pr = grid256();
  const ModelParams p = params(Functional::Zakharov, 3.5, 1.0);
  SolveReport a, b;
  std::thread ta([&] { a = mountain_pass_solve(p, pr.ops, pr.spectrum); });
  std::thread tb([&] { b = mountain_pass_solve(p, pr.ops, pr.spectrum); });
  ta.join();
  tb.join();
  EXPECT_EQ(a.solution.values, b.solution.values);
}

TEST(NehariDescent, MatchesMountainPassLevel)
{
  const auto& pr = grid256();
  const ModelParams p = params(Functional::Zakharov, 3.5, 1.0);
  const SolverConfig cfg;
  const SolveReport mp = mountain_pass_solve(p, pr.ops, pr.spectrum, cfg);
  const SolveReport nd = nehari_descent(p, pr.ops, pr.spectrum.phi(1), cfg);
  expect_critical_point(nd, p, pr.ops, cfg);
  EXPECT_NEAR(nd.energy, mp.energy, 1e-6 * mp.energy);
  EXPECT_LE(aligned_distance(nd.solution, mp.solution, pr.ops), 1e-4);
}

TEST(NehariDescent, LevelNeverBelowGroundState)
{
  const auto& pr = grid256();
  const ModelParams p = params(Functional::Zakharov, 7.0, 0.5);
  const SolveReport mp = mountain_pass_solve(p, pr.ops, pr.spectrum);
  Rng rng(9);
  for (int i = 0; i < 4; ++i) {
    const Field u0(pr.ops.spec(), random_smooth_field(pr.ops.spec(), rng, 4));
    if (!fibering_project(u0, p, pr.ops).t_root) {
      continue;
    }
    const SolveReport r = nehari_descent(p, pr.ops, u0);
    EXPECT_GE(r.energy, mp.energy * (1 - 1e-8));
    for (std::size_t k = 1; k < r.level_trace.size(); ++k) {
      EXPECT_LE(r.level_trace[k], r.level_trace[k - 1] * (1 + 1e-10) + 1e-14);
    }
  }
}

TEST(NehariDescent, Approx1FromRandomStart)
{
  const auto& pr = grid256();
  const ModelParams p = params(Functional::Approx1, 1.0, 2.0);
  Rng rng(4);
  const Field u0(pr.ops.spec(), random_smooth_field(pr.ops.spec(), rng));
  const SolverConfig cfg;
  const SolveReport r = nehari_descent(p, pr.ops, u0, cfg);
  expect_critical_point(r, p, pr.ops, cfg);
  EXPECT_GT(r.energy, 0.0);
}

TEST(NehariDescent, RejectsDirectionWithoutProjection)
{
  const auto& pr = grid256();
  EXPECT_THROW(nehari_descent(params(Functional::Zakharov, 2.0, 1.5), pr.ops, pr.spectrum.phi(1)),
               ValidationError);
}

TEST(Solution, EvenSymmetry)
{
  const auto& pr = grid256();
  const ModelParams p = params(Functional::Zakharov, 3.5, 1.0);
  const SolverConfig cfg;
  const SolveReport r = mountain_pass_solve(p, pr.ops, pr.spectrum, cfg);
  const Field neg(r.solution.spec, -r.solution.values);
  const SolveReport s = summarize(neg, p, pr.ops, cfg);
  EXPECT_EQ(s.status, SolveStatus::Converged);
  EXPECT_EQ(s.energy, r.energy);
  EXPECT_EQ(s.morse_index, r.morse_index);
}

TEST(Newton, DeflationFindsSecondSolution)
{
  const auto& pr = grid256();
  const ModelParams p = params(Functional::Zakharov, 7.0, 0.5); // lambda_2 < 6.5 < lambda_3
  const SolverConfig cfg;
  const SolveReport mp = mountain_pass_solve(p, pr.ops, pr.spectrum, cfg);
  DeflationSet defl;
  defl.known.push_back(mp.solution);
  const Field& phi2 = pr.spectrum.phi(2);
  const auto t = fibering_project(phi2, p, pr.ops).t_root;
  ASSERT_TRUE(t.has_value());
  const SolveReport r = newton_deflated(p, pr.ops, Field(phi2.spec, *t * phi2.values), defl, cfg);
  expect_critical_point(r, p, pr.ops, cfg);
  EXPECT_GT(aligned_distance(r.solution, mp.solution, pr.ops), cfg.distinct_floor);
  EXPECT_GT(r.energy, mp.energy);
  EXPECT_EQ(defl.known.size(), 2u);
  EXPECT_LT(defl.min_relative_distance(r.solution, pr.ops), 1e-12);
}

TEST(Newton, CollapsesBelowThreshold)
{
  const auto& pr = grid256();
  const ModelParams p = params(Functional::Zakharov, 2.0, 1.5);
  Rng rng(12);
  for (int i = 0; i < 5; ++i) {
    DeflationSet defl;
    defl.include_trivial = false;
    const Field u0(pr.ops.spec(), 0.5 * random_smooth_field(pr.ops.spec(), rng));
    const SolveReport r = newton_deflated(p, pr.ops, u0, defl);
    EXPECT_NE(r.status, SolveStatus::Converged);
    EXPECT_TRUE(defl.known.empty());
  }
}

TEST(Multiplicity, GroundStateWindow)
{
  const auto& pr = grid256();
  const auto sols = multiplicity_search(params(Functional::Zakharov, 3.5, 1.0), pr.ops, pr.spectrum, 1);
  EXPECT_GE(sols.size(), 1u);
}

TEST(Multiplicity, TwoDistinctSolutionsInSecondWindow)
{
  const auto& pr = grid256();
  const ModelParams p = params(Functional::Zakharov, 7.0, 0.5);
  const SolverConfig cfg;
  const auto sols = multiplicity_search(p, pr.ops, pr.spectrum, 2, cfg);
  ASSERT_GE(sols.size(), 2u);
  for (std::size_t i = 0; i < sols.size(); ++i) {
    expect_critical_point(sols[i], p, pr.ops, cfg);
    EXPECT_GT(sols[i].energy, 0.0);
    EXPECT_GE(sols[i].morse_index, 1);
    EXPECT_LT(energy_identity(sols[i].solution, p, pr.ops).value, p.kappa * pi / 2);
    for (std::size_t j = 0; j < i; ++j) {
      EXPECT_GT(aligned_distance(sols[i].solution, sols[j].solution, pr.ops), cfg.distinct_floor);
    }
  }
}

TEST(Multiplicity, RejectsWrongWindow)
{
  const auto& pr = grid256();
  EXPECT_THROW(multiplicity_search(params(Functional::Zakharov, 3.5, 1.0), pr.ops, pr.spectrum, 2),
               ValidationError);
}

// Continuum threshold for E2(t sin)/t^2 < 0, from Wallis integrals and a
// scalar minimization over tau = t^2.
double e2_ratio_min(double kappa, double w2)
{
  const double c2 = oracle::simpson([](double x) { return std::pow(std::cos(x), 2); }, 0, pi, 20000);
  const double c4 = oracle::simpson([](double x) { return std::pow(std::cos(x), 4); }, 0, pi, 20000);
  const double c6 = oracle::simpson([](double x) { return std::pow(std::cos(x), 6); }, 0, pi, 20000);
  auto ratio = [&](double tau) {
    return 0.5 * c2 + 0.5 * w2 * c2 - 0.25 * kappa * tau * c4 + kappa / 12.0 * tau * tau * c6;
  };
  return oracle::golden_min(ratio, 0.0, 10.0).second;
}

TEST(Approx2, NegativityThresholdOracle)
{
  const double kstar = 80.0 / 27.0;
  EXPECT_LT(e2_ratio_min(kstar * 1.001, 0.0), 0.0);
  EXPECT_GT(e2_ratio_min(kstar * 0.999, 0.0), 0.0);
  EXPECT_NEAR(e2_ratio_min(4.0, 0.0), pi / 4 - 4.0 * 27 * pi / 320, 1e-9);

  const auto& pr = grid256();
  const Field& phi1 = pr.spectrum.phi(1);
  const Field sine(phi1.spec, phi1.values / phi1.values.cwiseAbs().maxCoeff());
  EXPECT_TRUE(negativity_scan(params(Functional::Approx2, 1.05 * kstar, 0.0), pr.ops, sine).certified);
  EXPECT_FALSE(negativity_scan(params(Functional::Approx2, 0.95 * kstar, 0.0), pr.ops, sine).certified);
  const NegativityScan s = negativity_scan(params(Functional::Approx2, 4.0, 0.0), pr.ops, sine);
  EXPECT_NEAR(s.min_ratio, e2_ratio_min(4.0, 0.0), 1e-3);
  EXPECT_NEAR(s.t_at_min * s.t_at_min, 1.8, 1e-2);
}

TEST(Approx2, GlobalMinimizerNegativeAndStable)
{
  const auto& pr = grid256();
  const ModelParams p = params(Functional::Approx2, 4.0, 0.0);
  const E2Report r = global_minimize_e2(p, pr.ops, pr.spectrum);
  EXPECT_TRUE(r.negativity.certified);
  EXPECT_EQ(r.best.status, SolveStatus::Converged);
  EXPECT_LT(r.best.energy, 0.0);
  EXPECT_LE(r.best.energy, r.negativity.min_ratio * r.negativity.t_at_min * r.negativity.t_at_min + 1e-9);
  EXPECT_EQ(r.best.morse_index, 0);
}

TEST(Approx2, TrivialWhenNotNegative)
{
  const auto& pr = grid256();
  const E2Report r = global_minimize_e2(params(Functional::Approx2, 2.0, 1.5), pr.ops, pr.spectrum);
  EXPECT_FALSE(r.negativity.certified);
  EXPECT_LE(r.best.energy, 0.0);
}

TEST(Nonexistence, PassesBelowThreshold)
{
  const auto& pr = grid256();
  const NonexistenceCertificate c =
    nonexistence_certificate(params(Functional::Zakharov, 2.0, 1.5), pr.ops, pr.spectrum, 20);
  EXPECT_EQ(c.verdict, CertificateVerdict::Passed);
  EXPECT_EQ(c.threshold_check, "below");
  EXPECT_EQ(c.descent_collapse_count, 20);
  EXPECT_EQ(c.projection_absent_count, 20);
  EXPECT_TRUE(c.violations.empty());
}

TEST(Nonexistence, AbstainsAtAndAboveThreshold)
{
  const auto& pr = grid256();
  const double l1 = pr.spectrum.lambda(1);
  const NonexistenceCertificate at =
    nonexistence_certificate(params(Functional::Zakharov, 1.0 + l1, 1.0), pr.ops, pr.spectrum, 5);
  EXPECT_EQ(at.verdict, CertificateVerdict::Abstained);
  EXPECT_EQ(at.threshold_check, "borderline");
  const NonexistenceCertificate above =
    nonexistence_certificate(params(Functional::Zakharov, 3.5, 1.0), pr.ops, pr.spectrum, 5);
  EXPECT_EQ(above.verdict, CertificateVerdict::Abstained);
  EXPECT_EQ(above.threshold_check, "above");
}

TEST(Nonexistence, Approx1HasSolutionWhereZakharovHasNone)
{
  const auto& pr = grid256();
  const SolverConfig cfg;
  const ModelParams p = params(Functional::Approx1, 2.0, 1.5);
  const SolveReport r = mountain_pass_solve(p, pr.ops, pr.spectrum, cfg);
  expect_critical_point(r, p, pr.ops, cfg);
  EXPECT_GT(r.energy, 0.0);
}

TEST(Morse, MatchesDensePencilAtZero)
{
  // H(0) = A + omega^2 B for Zakharov; pencil (H, A) has eigenvalues
  // 1 + omega^2 / lambda_k, all positive.
  const OperatorSet ops(line(80));
  const ModelParams p = params(Functional::Zakharov, 1.5, 0.7);
  const MorseResult m = morse_analysis(Field::zeros(ops.spec()), p, ops, 4, 1e-8);
  ASSERT_TRUE(m.converged);
  EXPECT_EQ(m.index, 0);
  const Eigen::MatrixXd A = Eigen::MatrixXd(ops.bilaplacian());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ref(A + 0.7 * Eigen::MatrixXd(ops.laplacian()), A);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(m.eigenvalues[i], ref.eigenvalues()[i], 1e-6);
  }
}

TEST(Morse, NegativeDirectionsCountedAgainstDense)
{
  // Approx1 at zero: H = A - omega^2... with omega^2 < 0 we get
  // A + omega^2 B indefinite and index #{k : lambda_k < -omega^2}.
  const OperatorSet ops(line(80));
  const ModelParams p = params(Functional::Approx1, 1.0, -10.0);
  const Spectrum s = solve_spectrum_dense(ops, 6);
  int expect = 0;
  for (int k = 1; k <= 6; ++k) {
    expect += s.lambda(k) < 10.0;
  }
  EXPECT_EQ(morse_index(Field::zeros(ops.spec()), p, ops, 6), expect);
}

} // namespace
} // namespace zakharov
