// Acceptance run: one line per criterion, nonzero exit if any fails.
#include "oracles.hpp"

#include "zakharov/experiment.hpp"
#include "zakharov/random.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace zakharov;
namespace fs = std::filesystem;
using oracle::pi;

namespace {

struct Outcome
{
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

DomainSpec line(int n, BoundaryKind bc = BoundaryKind::Navier)
{
  DomainSpec d;
  d.n = n;
  d.bc = bc;
  return d;
}

ModelParams params(Functional f, double kappa, double w2)
{
  ModelParams p;
  p.functional = f;
  p.kappa = kappa;
  p.omega_sq = w2;
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome spectrum_correctness()
{
  const OperatorSet nav(line(1024));
  const Spectrum sn = solve_spectrum(nav, 3);
  double nav_err = 0.0;
  for (int k = 1; k <= 3; ++k) {
    nav_err = std::max(nav_err, std::abs(sn.lambda(k) - k * k));
  }

  const OperatorSet dir(line(1024, BoundaryKind::Dirichlet));
  const Spectrum sd = solve_spectrum(dir, 1);
  const Vector clamped = sample(dir.spec(), [](double x) { return 1.0 - std::cos(2.0 * x); });
  const Vector& phi = sd.phi(1).values;
  const double corr = std::abs(phi.dot(clamped)) / (phi.norm() * clamped.norm());
  const double dir_err = std::abs(sd.lambda(1) - 4.0);

  DomainSpec sq;
  sq.dimension = 2;
  sq.extents = {pi, pi};
  sq.n = 48;
  const OperatorSet ops2(sq);
  const double sq_err = std::abs(solve_spectrum(ops2, 1).lambda(1) - 2.0);

  Outcome o;
  o.pass = nav_err <= 1e-3 && dir_err <= 1e-3 && corr >= 0.999 && sq_err <= 5e-3;
  o.detail = fmt("navier max|lambda_k-k^2|=%.2e dirichlet |lambda_1-4|=%.2e corr=%.6f square |lambda_1-2|=%.2e",
                 nav_err, dir_err, corr, sq_err);
  return o;
}

Outcome derivative_fidelity()
{
  const DomainSpec d = line(128);
  const OperatorSet ops(d);
  Rng rng(2024);
  double grad_worst = 0.0, hess_worst = 0.0, sym_worst = 0.0;
  for (Functional f : {Functional::Zakharov, Functional::Approx1, Functional::Approx2}) {
    const ModelParams p = params(f, 3.0, 0.7);
    for (int i = 0; i < 20; ++i) {
      const Field u(d, random_smooth_field(d, rng));
      const Vector v = random_smooth_field(d, rng);
      const Vector w = random_smooth_field(d, rng);
      const double eps = 1e-5;
      const double fd =
        (energy(Field(d, u.values + eps * v), p, ops) - energy(Field(d, u.values - eps * v), p, ops)) / (2 * eps);
      const double an = ops.dot(gradient(u, p, ops).values, v);
      grad_worst = std::max(grad_worst, std::abs(an - fd) / (1.0 + std::abs(fd)));

      const Vector gp = gradient(Field(d, u.values + eps * v), p, ops).values;
      const Vector gm = gradient(Field(d, u.values - eps * v), p, ops).values;
      const double hfd = ops.dot(gp - gm, w) / (2 * eps);
      const double hv = ops.dot(hess_vec(u, Field(d, v), p, ops).values, w);
      const double hw = ops.dot(hess_vec(u, Field(d, w), p, ops).values, v);
      hess_worst = std::max(hess_worst, std::abs(hv - hfd) / (1.0 + std::abs(hfd)));
      sym_worst = std::max(sym_worst, std::abs(hv - hw) / (1.0 + std::abs(hv)));
    }
  }
  Outcome o;
  o.pass = grad_worst <= 1e-6 && hess_worst <= 1e-5 && sym_worst <= 1e-10;
  o.detail = fmt("gradient rel=%.2e hess_vec rel=%.2e symmetry=%.2e over 60 fields", grad_worst, hess_worst,
                 sym_worst);
  return o;
}

Outcome nonexistence()
{
  const auto t0 = std::chrono::steady_clock::now();
  const OperatorSet ops(line(256));
  const Spectrum s = solve_spectrum(ops, 2);
  const NonexistenceCertificate c = nonexistence_certificate(params(Functional::Zakharov, 2.0, 1.5), ops, s, 50);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = c.verdict == CertificateVerdict::Passed && c.descent_collapse_count == 50 &&
           c.projection_absent_count == 50 && secs <= 30.0;
  o.detail = fmt("verdict=%s collapsed=%d/50 absent=%d/50 time=%.1fs", to_string(c.verdict).c_str(),
                 c.descent_collapse_count, c.projection_absent_count, secs);
  return o;
}

Outcome existence()
{
  const OperatorSet ops(line(256));
  const Spectrum s = solve_spectrum(ops, 2);
  const ModelParams p = params(Functional::Zakharov, 3.5, 1.0);
  const SolverConfig cfg;
  const SolveReport mp = mountain_pass_solve(p, ops, s, cfg);
  const double scale = std::max(1.0, ops.x_norm(mp.solution.values));
  const EnergyIdentity id = energy_identity(mp.solution, p, ops);
  const double id_err = std::abs(id.value - mp.energy);

  // Random fields often lie outside the cone with a Nehari projection.
  Rng rng(7);
  const Vector& phi = s.phi(1).values;
  const Vector noise = random_smooth_field(ops.spec(), rng);
  const Field start(ops.spec(), phi + 0.3 * phi.norm() / noise.norm() * noise);
  const SolveReport nd = nehari_descent(p, ops, start, cfg);
  const double rel = std::abs(nd.energy - mp.energy) / mp.energy;

  Outcome o;
  o.pass = mp.status == SolveStatus::Converged && mp.grad_norm <= cfg.tol * scale && mp.energy > 0.0 &&
           mp.energy < 3.5 * pi / 2 && mp.morse_index >= 1 && id_err <= 1e-10 &&
           nd.status == SolveStatus::Converged && rel <= 1e-6;
  o.detail = fmt("status=%s E=%.10f grad=%.2e morse=%d |identity-E|=%.2e nehari-descent rel=%.2e",
                 to_string(mp.status).c_str(), mp.energy, mp.grad_norm / scale, mp.morse_index, id_err, rel);
  return o;
}

Outcome multiplicity()
{
  const auto t0 = std::chrono::steady_clock::now();
  const OperatorSet ops(line(256));
  const Spectrum s = solve_spectrum(ops, 3);
  const ModelParams p = params(Functional::Zakharov, 7.0, 0.5);
  const SolverConfig cfg;
  const auto sols = multiplicity_search(p, ops, s, 2, cfg);
  bool each = true;
  double min_dist = std::numeric_limits<double>::infinity();
  std::string energies;
  for (std::size_t i = 0; i < sols.size(); ++i) {
    const SolveReport& r = sols[i];
    const double scale = std::max(1.0, ops.x_norm(r.solution.values));
    each = each && r.energy > 0.0 && std::abs(r.nehari_res) <= cfg.tol * scale * scale && r.morse_index >= 1;
    for (std::size_t j = 0; j < i; ++j) {
      min_dist = std::min(min_dist, aligned_distance(r.solution, sols[j].solution, ops));
    }
    energies += fmt("%s%.6f/%d", i ? "," : "", r.energy, r.morse_index);
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = sols.size() >= 2 && each && min_dist > cfg.distinct_floor && secs <= 120.0;
  o.detail = fmt("found=%zu energy/morse=[%s] min distance=%.3f time=%.1fs", sols.size(), energies.c_str(),
                 min_dist, secs);
  return o;
}

Outcome approx1_contrast()
{
  const OperatorSet ops(line(256));
  const Spectrum s = solve_spectrum(ops, 2);
  const ModelParams p = params(Functional::Approx1, 2.0, 1.5);
  const SolverConfig cfg;
  const SolveReport r = mountain_pass_solve(p, ops, s, cfg);
  const double nonzero = std::sqrt(ops.grad_l2_sq(r.solution.values));

  const ModelParams q = params(Functional::Approx1, 1.0, 1.0);
  const Field u(ops.spec(), sample(ops.spec(), [](double x) { return std::sin(x); }));
  const FiberingResult closed = fibering_project(u, q, ops);
  const FiberingResult scanned = fibering_scan(u, q, ops);
  const double h = ops.spec().spacing(0);
  const double t_err = closed.t_root ? std::abs(*closed.t_root - std::sqrt(8.0 / 3.0)) : INFINITY;
  const double scan_err =
    closed.t_root && scanned.t_root ? std::abs(*closed.t_root - *scanned.t_root) : INFINITY;

  Outcome o;
  o.pass = r.status == SolveStatus::Converged && nonzero > cfg.zero_floor && r.energy > 0.0 && r.morse_index >= 1 &&
           t_err <= std::max(1e-10, h * h) && scan_err <= 1e-10;
  o.detail = fmt("E1=%.6f morse=%d |grad u|=%.3f |t_u-sqrt(8/3)|=%.2e (h^2=%.2e) |closed-scan|=%.2e", r.energy,
                 r.morse_index, nonzero, t_err, h * h, scan_err);
  return o;
}

Outcome approx1_unbounded()
{
  // omegaSq = 0 keeps every term homogeneous of degree -3 under dilation.
  const DomainSpec d = line(1023);
  const OperatorSet ops(d);
  const ModelParams p = params(Functional::Approx1, 1.0, 0.0);
  const Vector bump = sample(d, [](double x) {
    const double r = 2.0 * x / pi - 1.0;
    return std::abs(r) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0;
  });
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::string levels;
  int m = 0;
  for (double sigma : {1.0, 0.5, 0.25, 0.125}) {
    const Field u = dilate(Field(d, bump), sigma);
    const FiberingResult fr = fibering_project(u, p, ops);
    if (!fr.t_root) {
      return {false, fmt("no Nehari projection at sigma=%g", sigma)};
    }
    const double e = energy(Field(d, *fr.t_root * u.values), p, ops);
    const double x = std::log(sigma), y = std::log(e);
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++m;
    levels += fmt("%s%.4g", m > 1 ? "," : "", e);
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return {slope >= -3.3 && slope <= -2.7, fmt("slope=%.4f levels=[%s]", slope, levels.c_str())};
}

Outcome approx2_contrast()
{
  // Smallest kappa with min_tau of E2(t sin)/t^2 negative, from the Wallis
  // integrals pi/2, 3pi/8, 5pi/16.
  auto ratio_min = [](double kappa) {
    auto ratio = [kappa](double tau) {
      return 0.5 * pi / 2 - 0.25 * kappa * tau * 3 * pi / 8 + kappa / 12.0 * tau * tau * 5 * pi / 16;
    };
    return oracle::golden_min(ratio, 0.0, 10.0).second;
  };
  const double kstar = oracle::bisect(ratio_min, 1.0, 10.0);

  const OperatorSet ops(line(256));
  const Spectrum s = solve_spectrum(ops, 2);
  const ModelParams p = params(Functional::Approx2, 4.0, 0.0);
  const E2Report r = global_minimize_e2(p, ops, s);

  Outcome o;
  o.pass = std::abs(kstar - 80.0 / 27.0) <= 1e-6 && p.kappa > kstar && r.negativity.certified &&
           r.best.status == SolveStatus::Converged && r.best.energy < 0.0 && r.best.morse_index == 0;
  o.detail = fmt("threshold=%.8f (80/27=%.8f) certified=%d E2=%.6f morse=%d", kstar, 80.0 / 27.0,
                 int(r.negativity.certified), r.best.energy, r.best.morse_index);
  return o;
}

Outcome identity()
{
  Rng rng(99);
  double worst = 0.0;
  int count = 0;
  for (BoundaryKind bc : {BoundaryKind::Navier, BoundaryKind::Dirichlet}) {
    const OperatorSet ops(line(200, bc));
    for (double amp : {0.1, 1.0, 10.0}) {
      for (int i = 0; i < 20; ++i) {
        const Field u(ops.spec(), amp * random_smooth_field(ops.spec(), rng, 6, 0.1));
        const ModelParams p = params(Functional::Zakharov, rng.uniform(0.5, 8.0), rng.uniform(0.0, 3.0));
        const double e = energy(u, p, ops);
        worst = std::max(worst, energy_identity_gap(u, p, ops) / (1.0 + std::abs(e)));
        ++count;
      }
    }
  }
  return {worst <= 1e-12, fmt("max gap/(1+|E|)=%.2e over %d fields", worst, count)};
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility()
{
  const fs::path root = fs::temp_directory_path() / ("zakharov-acceptance-" + std::to_string(::getpid()));
  Json j = Json::parse(R"({
    "task": "multiplicity",
    "domain": {"dimension": 1, "bc": "navier", "n": 128},
    "params": {"kappa": 7.0, "omegaSq": 0.5, "functional": "zakharov"},
    "window": 2,
    "seed": 31
  })");
  std::vector<std::string> dumps;
  std::vector<std::string> files;
  j["output_dir"] = root.string();
  for (int pass = 0; pass < 2; ++pass) {
    fs::remove_all(root);
    const RunOutcome r = run(parse_config(j));
    Json rec = Json::parse(slurp(root / "multiplicity.json"));
    rec.erase("timing");
    dumps.push_back(rec.dump());
    std::string all;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file() && e.path().extension() == ".csv") {
        all += fs::relative(e.path(), root).string() + slurp(e.path());
      }
    }
    files.push_back(all);
    if (r.exit_code != ExitOk) {
      fs::remove_all(root);
      return {false, fmt("run exited %d", r.exit_code)};
    }
  }
  fs::remove_all(root);
  const bool same = dumps[0] == dumps[1] && files[0] == files[1] && !files[0].empty();
  return {same, fmt("record bytes=%zu csv bytes=%zu identical=%d", dumps[0].size(), files[0].size(), int(same))};
}

} // namespace

int main()
{
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
    {"AC1 spectrum correctness", spectrum_correctness},
    {"AC2 gradient/hessian fidelity", derivative_fidelity},
    {"AC3 nonexistence below threshold", nonexistence},
    {"AC4 existence, saddle, level bound", existence},
    {"AC5 multiplicity in second window", multiplicity},
    {"AC6 approx1 contrast", approx1_contrast},
    {"AC7 approx1 unbounded levels", approx1_unbounded},
    {"AC8 approx2 contrast", approx2_contrast},
    {"AC9 discrete energy identity", identity},
    {"AC10 reproducibility", reproducibility},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %-36s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
