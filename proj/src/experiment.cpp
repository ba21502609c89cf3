#include "zakharov/experiment.hpp"

#include "zakharov/random.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#ifndef ZAKHAROV_VERSION
#define ZAKHAROV_VERSION "0.0.0"
#endif

namespace zakharov {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSchema = "zakharov-run/1";

// ---------------------------------------------------------------- parsing --

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where)
{
  if (!j.is_object()) {
    throw ValidationError(where + " must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ValidationError("unknown key \"" + (where.empty() ? key : where + "." + key) + "\"");
    }
  }
}

std::string path_of(const std::string& where, const char* key)
{
  return where.empty() ? key : where + "." + key;
}

double get_number(const Json& j, const char* key, const std::string& where, double fallback)
{
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j.at(key).is_number()) {
    throw ValidationError(path_of(where, key) + " must be a number");
  }
  return j.at(key).get<double>();
}

int get_int(const Json& j, const char* key, const std::string& where, int fallback)
{
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j.at(key).is_number_integer()) {
    throw ValidationError(path_of(where, key) + " must be an integer");
  }
  return j.at(key).get<int>();
}

std::string get_string(const Json& j, const char* key, const std::string& where, const std::string& fallback)
{
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j.at(key).is_string()) {
    throw ValidationError(path_of(where, key) + " must be a string");
  }
  return j.at(key).get<std::string>();
}

const std::set<std::string> kTasks{"spectrum", "solve", "multiplicity", "nonexist", "compare", "verify", "sweep"};
const std::set<std::string> kMethods{"auto", "mountain_pass", "nehari", "e2_global"};
const std::set<std::string> kSuites{"identities", "spectrum", "fibering", "theorems"};
const std::set<std::string> kAxes{"omegaSq", "kappa", "n", "sigma"};

void validate_config(const ExperimentConfig& c)
{
  if (!kTasks.count(c.task)) {
    throw ValidationError("task must be one of spectrum, solve, multiplicity, nonexist, compare, verify, sweep; got \"" +
                          c.task + "\"");
  }
  c.domain.validate();
  c.params.validate();
  if (!kMethods.count(c.method)) {
    throw ValidationError("method must be one of auto, mountain_pass, nehari, e2_global");
  }
  if (!kSuites.count(c.suite)) {
    throw ValidationError("suite must be one of identities, spectrum, fibering, theorems");
  }
  if (c.k_max < 1 || c.k_max >= c.domain.node_count()) {
    throw ValidationError("k_max must lie in [1, node count)");
  }
  if (c.window < 0) {
    throw ValidationError("window must be non-negative");
  }
  if (c.trials < 0) {
    throw ValidationError("trials must be non-negative");
  }
  const SolverConfig& s = c.solver;
  if (!(s.tol > 0.0) || !(s.handoff_tol > 0.0) || !(s.zero_floor > 0.0) || !(s.distinct_floor > 0.0) ||
      !(s.morse_tol > 0.0) || !(s.margin_factor >= 0.0)) {
    throw ValidationError("solver tolerances must be positive");
  }
  if (s.max_iterations < 1 || s.newton_max_iterations < 1 || s.minres_max_iterations < 1 || s.morse_m < 1 ||
      s.random_seeds < 0) {
    throw ValidationError("solver iteration counts must be positive");
  }
  if (s.path_nodes < 3) {
    throw ValidationError("solver.path_nodes must be at least 3");
  }
  if (c.task == "sweep") {
    if (!kAxes.count(c.axis)) {
      throw ValidationError("sweep.axis must be one of omegaSq, kappa, n, sigma");
    }
    if (c.values.empty()) {
      throw ValidationError("sweep.values must not be empty");
    }
  }
}

// ------------------------------------------------------------------ output --

std::string format_double(double v)
{
  if (!std::isfinite(v)) {
    return "nan";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_json(const Json& j, const fs::path& file)
{
  std::ofstream out(file);
  if (!out) {
    throw ValidationError("cannot write " + file.string());
  }
  out << j.dump(2) << '\n';
}

Json domain_json(const DomainSpec& d)
{
  return Json{{"dimension", d.dimension}, {"extents", d.extents}, {"bc", to_string(d.bc)}, {"n", d.n}};
}

Json params_json(const ModelParams& p)
{
  return Json{{"kappa", p.kappa}, {"omegaSq", p.omega_sq}, {"functional", to_string(p.functional)}};
}

struct Context
{
  const ExperimentConfig& cfg;
  std::string hash;
  fs::path out;
};

void dump_field(const Context& ctx, const std::string& name, const Field& u, Json extra)
{
  if (!ctx.cfg.write_fields) {
    return;
  }
  write_field_csv(u, ctx.out / (name + ".csv"));
  Json side{{"config_hash", ctx.hash},
            {"field", name + ".csv"},
            {"domain", domain_json(u.spec)},
            {"params", params_json(ctx.cfg.params)}};
  for (auto& [k, v] : extra.items()) {
    side[k] = v;
  }
  write_json(side, ctx.out / (name + ".json"));
}

Json report_sidecar(const SolveReport& r)
{
  return Json{{"energy", r.energy},
              {"morse_index", r.morse_index},
              {"grad_norm", r.grad_norm},
              {"nehari_res", r.nehari_res},
              {"status", to_string(r.status)}};
}

// ------------------------------------------------------------------- tasks --

double margin_for(const Spectrum& sp, int k, const SolverConfig& cfg)
{
  return threshold_margin(sp, k, cfg);
}

bool below_first_threshold(const ModelParams& p, const Spectrum& sp, const SolverConfig& cfg)
{
  return p.functional == Functional::Zakharov && p.linear_shift() <= sp.lambda(1) + margin_for(sp, 1, cfg);
}

Json threshold_json(const ModelParams& p, const Spectrum& sp, const SolverConfig& cfg)
{
  return Json{{"shift", p.linear_shift()}, {"lambda1", sp.lambda(1)}, {"margin", margin_for(sp, 1, cfg)}};
}

struct TaskResult
{
  Json results;
  int exit_code = ExitOk;
};

int certificate_exit(const NonexistenceCertificate& c)
{
  return c.verdict == CertificateVerdict::Violated ? ExitClaimViolation : ExitOk;
}

TaskResult certificate_task(const Context& ctx, const ModelParams& p, const OperatorSet& ops, const Spectrum& sp)
{
  ModelParams zp = p;
  zp.functional = Functional::Zakharov;
  const NonexistenceCertificate cert = nonexistence_certificate(zp, ops, sp, ctx.cfg.trials, ctx.cfg.solver);
  for (std::size_t i = 0; i < cert.violations.size(); ++i) {
    dump_field(ctx, "violation_" + std::to_string(i + 1), cert.violations[i], Json{{"verdict", "violated"}});
  }
  return {to_json(cert), certificate_exit(cert)};
}

int report_exit(const SolveReport& r)
{
  return r.status == SolveStatus::Converged ? ExitOk : ExitSolverFailure;
}

TaskResult spectrum_task(const Context& ctx, const OperatorSet& ops, const Spectrum& sp)
{
  (void)ops;
  for (std::size_t k = 0; k < sp.pairs.size(); ++k) {
    dump_field(ctx, "phi_" + std::to_string(k + 1), sp.pairs[k].phi, Json{{"lambda", sp.pairs[k].lambda}});
  }
  return {to_json(sp), ExitOk};
}

SolveReport solve_with_method(const ExperimentConfig& cfg, const OperatorSet& ops, const Spectrum& sp,
                              std::string& method)
{
  const ModelParams& p = cfg.params;
  if (p.functional == Functional::Approx2) {
    if (method != "auto" && method != "e2_global") {
      throw ValidationError("method " + method + " does not apply to approx2; use e2_global");
    }
    method = "e2_global";
    return global_minimize_e2(p, ops, sp, cfg.solver).best;
  }
  if (method == "e2_global") {
    throw ValidationError("method e2_global applies only to approx2");
  }
  if (method == "nehari") {
    return nehari_descent(p, ops, sp.phi(1), cfg.solver);
  }
  method = "mountain_pass";
  return mountain_pass_solve(p, ops, sp, cfg.solver);
}

TaskResult solve_task(const Context& ctx, const OperatorSet& ops, const Spectrum& sp)
{
  const ExperimentConfig& cfg = ctx.cfg;
  const ModelParams& p = cfg.params;
  TaskResult out;
  if (below_first_threshold(p, sp, cfg.solver)) {
    TaskResult cert = certificate_task(ctx, p, ops, sp);
    out.results = Json{{"method", "nonexistence_certificate"},
                       {"outcome", "no nonzero solution"},
                       {"threshold", threshold_json(p, sp, cfg.solver)},
                       {"certificate", cert.results}};
    out.exit_code = cert.exit_code;
    return out;
  }
  std::string method = cfg.method;
  const SolveReport r = solve_with_method(cfg, ops, sp, method);
  out.results = Json{{"method", method}, {"report", to_json(r)}};
  if (p.functional == Functional::Zakharov) {
    out.results["threshold"] = threshold_json(p, sp, cfg.solver);
    if (r.status == SolveStatus::Converged) {
      const EnergyIdentity id = energy_identity(r.solution, p, ops);
      out.results["energy_identity"] =
        Json{{"value", id.value}, {"gap", id.gap}, {"upper_bound", 0.5 * p.kappa * ops.spec().measure()}};
    }
  }
  const bool trivial_ok = p.functional == Functional::Approx2 && r.status == SolveStatus::ZeroCollapse;
  out.exit_code = trivial_ok ? ExitOk : report_exit(r);
  dump_field(ctx, "solution", r.solution, report_sidecar(r));
  return out;
}

int detect_window(const ModelParams& p, const Spectrum& sp, const SolverConfig& cfg)
{
  const double c = p.linear_shift();
  int k = 0;
  for (int i = 1; i <= static_cast<int>(sp.pairs.size()); ++i) {
    if (c > sp.lambda(i) + margin_for(sp, i, cfg)) {
      k = i;
    }
  }
  return k;
}

TaskResult multiplicity_task(const Context& ctx, const OperatorSet& ops, Spectrum sp)
{
  const ExperimentConfig& cfg = ctx.cfg;
  const ModelParams& p = cfg.params;
  if (p.functional != Functional::Zakharov) {
    throw ValidationError("multiplicity applies to the zakharov functional");
  }
  int k = cfg.window;
  if (k == 0) {
    k = detect_window(p, sp, cfg.solver);
    while (k == static_cast<int>(sp.pairs.size()) && k + 1 < ops.size()) {
      sp = solve_spectrum(ops, 2 * k);
      k = detect_window(p, sp, cfg.solver);
    }
  } else if (k + 1 > static_cast<int>(sp.pairs.size())) {
    sp = solve_spectrum(ops, k + 1);
  }
  if (k == 0) {
    throw ValidationError("kappa - omegaSq does not exceed lambda_1: no window; run the nonexist task");
  }
  const std::vector<SolveReport> found = multiplicity_search(p, ops, sp, k, cfg.solver);
  Json sols = Json::array();
  for (std::size_t i = 0; i < found.size(); ++i) {
    sols.push_back(to_json(found[i], false));
    dump_field(ctx, "solution_" + std::to_string(i + 1), found[i].solution, report_sidecar(found[i]));
  }
  TaskResult out;
  out.results = Json{{"window", k},
                     {"lambda_k", sp.lambda(k)},
                     {"lambda_k_plus_1", sp.lambda(k + 1)},
                     {"expected_at_least", k},
                     {"found", found.size()},
                     {"solutions", sols}};
  return out;
}

TaskResult nonexist_task(const Context& ctx, const OperatorSet& ops, const Spectrum& sp)
{
  const ExperimentConfig& cfg = ctx.cfg;
  if (cfg.params.functional != Functional::Zakharov) {
    throw ValidationError("nonexist applies to the zakharov functional");
  }
  TaskResult out = certificate_task(ctx, cfg.params, ops, sp);
  ModelParams a1 = cfg.params;
  a1.functional = Functional::Approx1;
  const SolveReport r = mountain_pass_solve(a1, ops, sp, cfg.solver);
  out.results = Json{{"certificate", out.results},
                     {"approx1_contrast", Json{{"status", to_string(r.status)},
                                               {"energy", r.energy},
                                               {"morse_index", r.morse_index}}}};
  return out;
}

TaskResult compare_task(const Context& ctx, const OperatorSet& ops, const Spectrum& sp)
{
  const ExperimentConfig& cfg = ctx.cfg;
  TaskResult out;
  Json rows = Json::array();

  ModelParams z = cfg.params;
  z.functional = Functional::Zakharov;
  if (below_first_threshold(z, sp, cfg.solver)) {
    TaskResult cert = certificate_task(ctx, z, ops, sp);
    const std::string verdict = cert.results["verdict"].get<std::string>();
    rows.push_back(Json{{"functional", "zakharov"},
                        {"outcome", verdict == "passed" ? "no nonzero solution" : "certificate " + verdict},
                        {"energy", 0.0},
                        {"morse_index", nullptr},
                        {"status", verdict}});
    out.exit_code = std::max(out.exit_code, cert.exit_code);
  } else {
    const SolveReport r = mountain_pass_solve(z, ops, sp, cfg.solver);
    rows.push_back(Json{{"functional", "zakharov"},
                        {"outcome", r.status == SolveStatus::Converged ? "ground state found" : "solver failed"},
                        {"energy", r.energy},
                        {"morse_index", r.morse_index},
                        {"status", to_string(r.status)}});
  }

  ModelParams a1 = cfg.params;
  a1.functional = Functional::Approx1;
  {
    const SolveReport r = mountain_pass_solve(a1, ops, sp, cfg.solver);
    const bool ok = r.status == SolveStatus::Converged && r.energy > 0.0;
    rows.push_back(Json{{"functional", "approx1"},
                        {"outcome", ok ? "ground state found, E>0" : "solver failed"},
                        {"energy", r.energy},
                        {"morse_index", r.morse_index},
                        {"status", to_string(r.status)}});
  }

  ModelParams a2 = cfg.params;
  a2.functional = Functional::Approx2;
  {
    const E2Report e2 = global_minimize_e2(a2, ops, sp, cfg.solver);
    const SolveReport& r = e2.best;
    std::string outcome = "minimizer found";
    if (r.status == SolveStatus::Converged) {
      outcome += ", E<0";
    } else if (r.status == SolveStatus::ZeroCollapse) {
      outcome += " (trivial, E=0)";
    } else {
      outcome = "solver failed";
    }
    rows.push_back(Json{{"functional", "approx2"},
                        {"outcome", outcome},
                        {"energy", r.energy},
                        {"morse_index", r.morse_index},
                        {"status", to_string(r.status)},
                        {"negativity_certified", e2.negativity.certified},
                        {"negativity_min_ratio", e2.negativity.min_ratio}});
  }
  out.results = Json{{"kappa", cfg.params.kappa}, {"omegaSq", cfg.params.omega_sq}, {"table", rows}};
  return out;
}

// ---------------------------------------------------------------- verify --

struct Check
{
  Json items = Json::array();
  bool all = true;

  void add(const std::string& name, bool passed, double value, double bound)
  {
    items.push_back(Json{{"name", name}, {"passed", passed}, {"value", value}, {"bound", bound}});
    all = all && passed;
  }
};

DomainSpec navier_line(int n)
{
  DomainSpec d;
  d.n = n;
  return d;
}

void verify_identities(const ExperimentConfig& cfg, Check& check)
{
  const OperatorSet ops(cfg.domain);
  Rng rng(cfg.solver.seed + 404);
  double worst_gap = 0.0, worst_grad = 0.0, worst_hess = 0.0, worst_sym = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Field u(ops.spec(), rng.uniform(0.2, 2.0) * random_smooth_field(ops.spec(), rng));
    const Field v(ops.spec(), random_smooth_field(ops.spec(), rng));
    const Field w(ops.spec(), random_smooth_field(ops.spec(), rng));
    ModelParams z = cfg.params;
    z.functional = Functional::Zakharov;
    const EnergyIdentity id = energy_identity(u, z, ops);
    worst_gap = std::max(worst_gap, id.gap / (1.0 + std::abs(id.energy)));
    for (Functional f : {Functional::Zakharov, Functional::Approx1, Functional::Approx2}) {
      ModelParams p = cfg.params;
      p.functional = f;
      const EnergyModel m(ops, p);
      const double eps = 1e-5;
      const double fd = (m.energy(u.values + eps * v.values) - m.energy(u.values - eps * v.values)) / (2 * eps);
      const double an = ops.dot(m.gradient(u.values), v.values);
      worst_grad = std::max(worst_grad, std::abs(fd - an) / std::max(std::abs(an), 1e-12));
      const Vector hfd = (m.gradient(u.values + eps * v.values) - m.gradient(u.values - eps * v.values)) / (2 * eps);
      const Vector hv = m.hess_vec(u.values, v.values);
      worst_hess = std::max(worst_hess, ops.dual_norm(hfd - hv) / ops.dual_norm(hv));
      const double a = ops.dot(hv, w.values);
      const double b = ops.dot(m.hess_vec(u.values, w.values), v.values);
      worst_sym = std::max(worst_sym, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
    }
  }
  check.add("energy_identity_gap", worst_gap <= 1e-12, worst_gap, 1e-12);
  check.add("gradient_vs_central_difference", worst_grad <= 1e-6, worst_grad, 1e-6);
  check.add("hess_vec_vs_differenced_gradient", worst_hess <= 1e-5, worst_hess, 1e-5);
  check.add("hessian_symmetry", worst_sym <= 1e-10, worst_sym, 1e-10);
}

void verify_spectrum(Check& check)
{
  const double pi = std::acos(-1.0);
  {
    const OperatorSet ops(navier_line(1024));
    const Spectrum sp = solve_spectrum(ops, 3);
    for (int k = 1; k <= 3; ++k) {
      const double err = std::abs(sp.lambda(k) - k * k);
      check.add("navier_lambda_" + std::to_string(k), err <= 1e-3, err, 1e-3);
    }
    double orth = 0.0;
    for (int i = 1; i <= 3; ++i) {
      for (int j = i + 1; j <= 3; ++j) {
        orth = std::max(orth, std::abs(ops.dot(ops.laplacian() * sp.phi(i).values, sp.phi(j).values)));
      }
    }
    check.add("navier_b_orthogonality", orth <= 1e-10, orth, 1e-10);
  }
  {
    DomainSpec d = navier_line(1024);
    d.bc = BoundaryKind::Dirichlet;
    const OperatorSet ops(d);
    const Spectrum sp = solve_spectrum(ops, 1);
    const double err = std::abs(sp.lambda(1) - 4.0);
    check.add("dirichlet_lambda_1", err <= 1e-3, err, 1e-3);
    const Vector ref = sample(d, [](double x) { return 1.0 - std::cos(2.0 * x); });
    const Vector& phi = sp.phi(1).values;
    const double corr = std::abs(phi.dot(ref)) / (phi.norm() * ref.norm());
    check.add("dirichlet_eigenfunction_correlation", corr >= 0.999, corr, 0.999);
  }
  {
    DomainSpec d;
    d.dimension = 2;
    d.extents = {pi, pi};
    d.n = 48;
    const OperatorSet ops(d);
    const Spectrum sp = solve_spectrum(ops, 1);
    const double err = std::abs(sp.lambda(1) - 2.0);
    check.add("navier_2d_lambda_1", err <= 5e-3, err, 5e-3);
  }
}

void verify_fibering(Check& check)
{
  const OperatorSet ops(navier_line(1024));
  const Spectrum sp = solve_spectrum(ops, 3);
  const Field s(ops.spec(), sample(ops.spec(), [](double x) { return std::sin(x); }));
  const ModelParams a1{1.0, 1.0, Functional::Approx1};
  const FiberingResult closed = fibering_project(s, a1, ops);
  const FiberingResult scanned = fibering_scan(s, a1, ops);
  const double t = closed.t_root.value_or(0.0);
  const double err = std::abs(t - std::sqrt(8.0 / 3.0));
  check.add("approx1_closed_form_t", err <= 1e-5, err, 1e-5);
  const double agree = std::abs(t - scanned.t_root.value_or(0.0)) / t;
  check.add("approx1_closed_form_vs_scan", agree <= 1e-10, agree, 1e-10);

  const ModelParams z{3.5, 1.0, Functional::Zakharov};
  const FiberingResult fr = fibering_project(sp.phi(1), z, ops);
  const double res =
    fr.t_root ? std::abs(nehari_residual(Field(ops.spec(), *fr.t_root * sp.phi(1).values), z, ops)) : 1.0;
  check.add("zakharov_projection_nehari_residual", fr.t_root && res <= 1e-10, res, 1e-10);

  const ModelParams below{2.0, 1.5, Functional::Zakharov};
  int absent = 0;
  for (int k = 1; k <= 3; ++k) {
    absent += !fibering_project(sp.phi(k), below, ops).t_root;
  }
  check.add("zakharov_projection_absent_below_threshold", absent == 3, absent, 3);
}

void verify_theorems(const ExperimentConfig& cfg, Check& check)
{
  const OperatorSet ops(navier_line(256));
  const Spectrum sp = solve_spectrum(ops, 4);
  const SolverConfig& s = cfg.solver;
  const double pi = std::acos(-1.0);

  const NonexistenceCertificate cert =
    nonexistence_certificate(ModelParams{2.0, 1.5, Functional::Zakharov}, ops, sp, 50, s);
  check.add("nonexistence_certificate", cert.verdict == CertificateVerdict::Passed, cert.descent_collapse_count, 50);

  const SolveReport g = mountain_pass_solve(ModelParams{3.5, 1.0, Functional::Zakharov}, ops, sp, s);
  const bool in_bound = g.energy > 0.0 && g.energy < 3.5 * pi / 2.0;
  check.add("ground_state_level_in_bound", g.status == SolveStatus::Converged && in_bound, g.energy, 3.5 * pi / 2.0);
  check.add("ground_state_saddle", g.morse_index >= 1, g.morse_index, 1);

  const auto found = multiplicity_search(ModelParams{7.0, 0.5, Functional::Zakharov}, ops, sp, 2, s);
  check.add("multiplicity_window_2", found.size() >= 2, static_cast<double>(found.size()), 2);

  const SolveReport a1 = mountain_pass_solve(ModelParams{2.0, 1.5, Functional::Approx1}, ops, sp, s);
  check.add("approx1_below_zakharov_threshold",
            a1.status == SolveStatus::Converged && a1.energy > 0.0 && a1.morse_index >= 1, a1.energy, 0.0);

  const E2Report e2 = global_minimize_e2(ModelParams{4.0, 0.0, Functional::Approx2}, ops, sp, s);
  check.add("approx2_negative_minimizer",
            e2.best.status == SolveStatus::Converged && e2.best.energy < 0.0 && e2.best.morse_index == 0,
            e2.best.energy, 0.0);
  check.add("approx2_negativity_certified", e2.negativity.certified, e2.negativity.min_ratio, 0.0);
}

TaskResult verify_task(const Context& ctx)
{
  Check check;
  if (ctx.cfg.suite == "identities") {
    verify_identities(ctx.cfg, check);
  } else if (ctx.cfg.suite == "spectrum") {
    verify_spectrum(check);
  } else if (ctx.cfg.suite == "fibering") {
    verify_fibering(check);
  } else {
    verify_theorems(ctx.cfg, check);
  }
  TaskResult out;
  out.results = Json{{"suite", ctx.cfg.suite}, {"passed", check.all}, {"checks", check.items}};
  out.exit_code = check.all ? ExitOk : ExitClaimViolation;
  return out;
}

// ------------------------------------------------------------------ sweep --

struct SweepRow
{
  double value = 0.0;
  double energy = std::nan("");
  double grad_norm = std::nan("");
  std::optional<int> morse_index;
  double nehari_res = std::nan("");
  std::string status;
  int exit_code = ExitOk;
};

Vector compact_bump(const DomainSpec& d)
{
  // exp(1 - 1 / (1 - r^2)) on the whole interval, r = 2x/L - 1.
  const double L = d.extents[0];
  return sample(d, [L](double x) {
    const double r = 2.0 * x / L - 1.0;
    return std::abs(r) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0;
  });
}

SweepRow sigma_row(const ExperimentConfig& cfg, double sigma)
{
  if (cfg.domain.dimension != 1) {
    throw ValidationError("sigma sweeps run on 1D domains");
  }
  ModelParams p = cfg.params;
  p.functional = Functional::Approx1;
  const OperatorSet ops(cfg.domain);
  const Field u = dilate(Field(cfg.domain, compact_bump(cfg.domain)), sigma);
  const FiberingResult fr = fibering_project(u, p, ops);
  SweepRow row;
  row.value = sigma;
  if (!fr.t_root) {
    row.status = "no projection";
    return row;
  }
  const Field tu(cfg.domain, *fr.t_root * u.values);
  row.energy = energy(tu, p, ops);
  row.nehari_res = nehari_residual(tu, p, ops);
  row.status = "projected";
  return row;
}

ExperimentConfig child_config(const ExperimentConfig& cfg, double value, std::size_t index)
{
  ExperimentConfig c = cfg;
  c.task = "solve";
  if (cfg.axis == "omegaSq") {
    c.params.omega_sq = value;
  } else if (cfg.axis == "kappa") {
    c.params.kappa = value;
  } else {
    if (value != std::floor(value)) {
      throw ValidationError("sweep over n needs integer values");
    }
    c.domain.n = static_cast<int>(value);
  }
  c.output_dir = cfg.output_dir / "runs" / ("run_" + std::to_string(index + 1));
  return c;
}

SweepRow solve_row(const ExperimentConfig& cfg, double value, std::size_t index)
{
  SweepRow row;
  row.value = value;
  const RunOutcome child = run_safely(child_config(cfg, value, index));
  row.exit_code = child.exit_code;
  if (child.record.contains("error")) {
    row.status = "error: " + child.record["error"].get<std::string>();
    return row;
  }
  const Json& res = child.record["results"];
  if (res.contains("report")) {
    const Json& r = res["report"];
    row.energy = r["energy"].get<double>();
    row.grad_norm = r["grad_norm"].get<double>();
    row.morse_index = r["morse_index"].get<int>();
    row.nehari_res = r["nehari_res"].get<double>();
    row.status = r["status"].get<std::string>();
  } else {
    row.energy = 0.0;
    row.status = "nonexistence:" + res["certificate"]["verdict"].get<std::string>();
  }
  return row;
}

double loglog_slope(const std::vector<SweepRow>& rows)
{
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const SweepRow& r : rows) {
    if (r.value > 0.0 && r.energy > 0.0) {
      const double x = std::log(r.value), y = std::log(r.energy);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
  }
  return m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : std::nan("");
}

TaskResult sweep_task(const Context& ctx)
{
  const ExperimentConfig& cfg = ctx.cfg;
  const std::size_t count = cfg.values.size();
  std::vector<SweepRow> rows(count);
  std::atomic<std::size_t> next{0};
  const int workers = std::min<int>(worker_count(), static_cast<int>(count));
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        rows[i] = cfg.axis == "sigma" ? sigma_row(cfg, cfg.values[i]) : solve_row(cfg, cfg.values[i], i);
      } catch (const std::exception& e) {
        rows[i].value = cfg.values[i];
        rows[i].status = std::string("error: ") + e.what();
        rows[i].exit_code = ExitSolverFailure;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) {
    pool.emplace_back(work);
  }
  work();
  for (auto& t : pool) {
    t.join();
  }

  std::ofstream csv(ctx.out / "sweep.csv");
  csv << "value,energy,grad_norm,morse_index,nehari_res,status\n";
  Json jrows = Json::array();
  for (const SweepRow& r : rows) {
    csv << format_double(r.value) << ',' << format_double(r.energy) << ',' << format_double(r.grad_norm) << ','
        << (r.morse_index ? std::to_string(*r.morse_index) : "") << ',' << format_double(r.nehari_res) << ','
        << r.status << '\n';
    jrows.push_back(Json{{"value", r.value},
                         {"energy", r.energy},
                         {"grad_norm", r.grad_norm},
                         {"morse_index", r.morse_index ? Json(*r.morse_index) : Json(nullptr)},
                         {"nehari_res", r.nehari_res},
                         {"status", r.status},
                         {"exit_code", r.exit_code}});
  }
  TaskResult out;
  for (const SweepRow& r : rows) {
    out.exit_code = std::max(out.exit_code, r.exit_code);
  }
  out.results = Json{{"axis", cfg.axis}, {"csv", "sweep.csv"}, {"rows", jrows}};
  if (cfg.axis == "sigma") {
    out.results["loglog_slope"] = loglog_slope(rows);
  }
  if (cfg.axis == "n" && rows.size() >= 3) {
    Json orders = Json::array();
    for (std::size_t i = 0; i + 2 < rows.size(); ++i) {
      const double ratio = (rows[i].energy - rows[i + 1].energy) / (rows[i + 1].energy - rows[i + 2].energy);
      orders.push_back(Json{{"values", {rows[i].value, rows[i + 1].value, rows[i + 2].value}},
                            {"ratio", ratio},
                            {"order", std::log2(std::abs(ratio))}});
    }
    out.results["richardson"] = orders;
  }
  return out;
}

} // namespace

// -------------------------------------------------------------- public API --

ExperimentConfig parse_config(const Json& j)
{
  reject_unknown(j,
                 {"task", "domain", "params", "solver", "seed", "k_max", "method", "window", "trials", "suite", "sweep",
                  "write_fields", "output_dir"},
                 "");
  ExperimentConfig c;
  c.task = get_string(j, "task", "", c.task);
  if (j.contains("domain")) {
    const Json& d = j.at("domain");
    reject_unknown(d, {"dimension", "extents", "bc", "n"}, "domain");
    c.domain.dimension = get_int(d, "dimension", "domain", c.domain.dimension);
    if (d.contains("extents")) {
      if (!d.at("extents").is_array()) {
        throw ValidationError("domain.extents must be an array of numbers");
      }
      c.domain.extents.clear();
      for (const Json& e : d.at("extents")) {
        if (!e.is_number()) {
          throw ValidationError("domain.extents must be an array of numbers");
        }
        c.domain.extents.push_back(e.get<double>());
      }
    } else {
      c.domain.extents.assign(c.domain.dimension, std::acos(-1.0));
    }
    c.domain.bc = boundary_from_string(get_string(d, "bc", "domain", to_string(c.domain.bc)));
    c.domain.n = get_int(d, "n", "domain", c.domain.n);
  }
  if (j.contains("params")) {
    const Json& p = j.at("params");
    reject_unknown(p, {"kappa", "omegaSq", "functional"}, "params");
    c.params.kappa = get_number(p, "kappa", "params", c.params.kappa);
    c.params.omega_sq = get_number(p, "omegaSq", "params", c.params.omega_sq);
    c.params.functional = functional_from_string(get_string(p, "functional", "params", "zakharov"));
  }
  if (j.contains("solver")) {
    const Json& s = j.at("solver");
    SolverConfig& o = c.solver;
    reject_unknown(s,
                   {"tol", "max_iterations", "path_nodes", "handoff_tol", "newton_max_iterations",
                    "minres_max_iterations", "morse_m", "morse_tol", "zero_floor", "distinct_floor", "margin_factor",
                    "random_seeds"},
                   "solver");
    o.tol = get_number(s, "tol", "solver", o.tol);
    o.max_iterations = get_int(s, "max_iterations", "solver", o.max_iterations);
    o.path_nodes = get_int(s, "path_nodes", "solver", o.path_nodes);
    o.handoff_tol = get_number(s, "handoff_tol", "solver", o.handoff_tol);
    o.newton_max_iterations = get_int(s, "newton_max_iterations", "solver", o.newton_max_iterations);
    o.minres_max_iterations = get_int(s, "minres_max_iterations", "solver", o.minres_max_iterations);
    o.morse_m = get_int(s, "morse_m", "solver", o.morse_m);
    o.morse_tol = get_number(s, "morse_tol", "solver", o.morse_tol);
    o.zero_floor = get_number(s, "zero_floor", "solver", o.zero_floor);
    o.distinct_floor = get_number(s, "distinct_floor", "solver", o.distinct_floor);
    o.margin_factor = get_number(s, "margin_factor", "solver", o.margin_factor);
    o.random_seeds = get_int(s, "random_seeds", "solver", o.random_seeds);
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer() || j.at("seed").get<long long>() < 0) {
      throw ValidationError("seed must be a non-negative integer");
    }
    c.solver.seed = j.at("seed").get<unsigned>();
  }
  c.k_max = get_int(j, "k_max", "", c.k_max);
  c.method = get_string(j, "method", "", c.method);
  c.window = get_int(j, "window", "", c.window);
  c.trials = get_int(j, "trials", "", c.trials);
  c.suite = get_string(j, "suite", "", c.suite);
  if (j.contains("sweep")) {
    const Json& s = j.at("sweep");
    reject_unknown(s, {"axis", "values"}, "sweep");
    c.axis = get_string(s, "axis", "sweep", "");
    if (s.contains("values")) {
      if (!s.at("values").is_array()) {
        throw ValidationError("sweep.values must be an array of numbers");
      }
      for (const Json& v : s.at("values")) {
        if (!v.is_number()) {
          throw ValidationError("sweep.values must be an array of numbers");
        }
        c.values.push_back(v.get<double>());
      }
    }
  }
  if (j.contains("write_fields")) {
    if (!j.at("write_fields").is_boolean()) {
      throw ValidationError("write_fields must be a boolean");
    }
    c.write_fields = j.at("write_fields").get<bool>();
  }
  if (j.contains("output_dir")) {
    c.output_dir = get_string(j, "output_dir", "", "");
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const fs::path& file)
{
  std::ifstream in(file);
  if (!in) {
    throw ValidationError("cannot read config file " + file.string());
  }
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

Json config_json(const ExperimentConfig& c)
{
  const SolverConfig& s = c.solver;
  Json j{{"task", c.task},
         {"domain", domain_json(c.domain)},
         {"params", params_json(c.params)},
         {"solver",
          Json{{"tol", s.tol},
               {"max_iterations", s.max_iterations},
               {"path_nodes", s.path_nodes},
               {"handoff_tol", s.handoff_tol},
               {"newton_max_iterations", s.newton_max_iterations},
               {"minres_max_iterations", s.minres_max_iterations},
               {"morse_m", s.morse_m},
               {"morse_tol", s.morse_tol},
               {"zero_floor", s.zero_floor},
               {"distinct_floor", s.distinct_floor},
               {"margin_factor", s.margin_factor},
               {"random_seeds", s.random_seeds}}},
         {"seed", s.seed},
         {"k_max", c.k_max},
         {"method", c.method},
         {"window", c.window},
         {"trials", c.trials},
         {"suite", c.suite},
         {"write_fields", c.write_fields}};
  if (c.task == "sweep") {
    j["sweep"] = Json{{"axis", c.axis}, {"values", c.values}};
  }
  return j;
}

std::string config_hash(const ExperimentConfig& cfg)
{
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : config_json(cfg).dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int worker_count()
{
  if (const char* env = std::getenv("ZAKHAROV_THREADS")) {
    int v = 0;
    const std::string s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v < 1) {
      throw ValidationError("ZAKHAROV_THREADS must be a positive integer, got \"" + s + "\"");
    }
    return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Json to_json(const SolveReport& r, bool with_trace)
{
  Json j{{"status", to_string(r.status)},
         {"energy", r.energy},
         {"grad_norm", r.grad_norm},
         {"nehari_res", r.nehari_res},
         {"morse_index", r.morse_index},
         {"morse_eigenvalues", r.morse_eigenvalues},
         {"iterations", r.iterations},
         {"message", r.message}};
  if (with_trace) {
    j["level_trace"] = r.level_trace;
  }
  return j;
}

Json to_json(const Spectrum& s)
{
  Json pairs = Json::array();
  for (const EigenPair& p : s.pairs) {
    pairs.push_back(Json{{"lambda", p.lambda}, {"residual", p.residual}});
  }
  return Json{{"pairs", pairs}, {"min_relative_gap", s.pairs.size() > 1 ? s.min_relative_gap() : 0.0}};
}

Json to_json(const NonexistenceCertificate& c)
{
  return Json{{"verdict", to_string(c.verdict)},
              {"threshold_check", c.threshold_check},
              {"shift", c.shift},
              {"lambda1", c.lambda1},
              {"margin", c.margin},
              {"trials", c.trials},
              {"descent_collapse_count", c.descent_collapse_count},
              {"projection_absent_count", c.projection_absent_count},
              {"violations", c.violations.size()},
              {"message", c.message}};
}

void write_field_csv(const Field& u, const fs::path& file)
{
  std::ofstream out(file);
  if (!out) {
    throw ValidationError("cannot write " + file.string());
  }
  const bool two_d = u.spec.dimension == 2;
  out << (two_d ? "x,y,u\n" : "x,u\n");
  for (Eigen::Index i = 0; i < u.values.size(); ++i) {
    out << format_double(u.coordinate(static_cast<int>(i), 0)) << ',';
    if (two_d) {
      out << format_double(u.coordinate(static_cast<int>(i), 1)) << ',';
    }
    out << format_double(u.values[i]) << '\n';
  }
}

Field read_field_csv(const DomainSpec& spec, const fs::path& file)
{
  spec.validate();
  std::ifstream in(file);
  if (!in) {
    throw ValidationError("cannot read " + file.string());
  }
  std::string line;
  std::getline(in, line);
  const std::string expected = spec.dimension == 2 ? "x,y,u" : "x,u";
  if (line != expected) {
    throw ValidationError("field CSV header must be \"" + expected + "\"");
  }
  Vector v(spec.node_count());
  Eigen::Index i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    if (i >= v.size()) {
      throw ValidationError("field CSV has more rows than grid nodes");
    }
    const std::size_t comma = line.rfind(',');
    v[i++] = std::stod(line.substr(comma + 1));
  }
  if (i != v.size()) {
    throw ValidationError("field CSV has fewer rows than grid nodes");
  }
  return Field(spec, std::move(v));
}

RunOutcome run(const ExperimentConfig& cfg)
{
  validate_config(cfg);
  const auto start = std::chrono::steady_clock::now();
  Context ctx{cfg, config_hash(cfg), cfg.output_dir};
  fs::create_directories(ctx.out);

  TaskResult task;
  Json grid = Json::object();
  if (cfg.task == "verify") {
    task = verify_task(ctx);
  } else if (cfg.task == "sweep") {
    task = sweep_task(ctx);
  } else {
    const OperatorSet ops(cfg.domain);
    const Spectrum sp = solve_spectrum(ops, cfg.k_max);
    grid = Json{{"h", cfg.domain.spacing(0)},
                {"node_count", cfg.domain.node_count()},
                {"lambda", Json::array()},
                {"threshold_margin", Json::array()}};
    for (int k = 1; k <= static_cast<int>(sp.pairs.size()); ++k) {
      grid["lambda"].push_back(sp.lambda(k));
      grid["threshold_margin"].push_back(margin_for(sp, k, cfg.solver));
    }
    if (cfg.task == "spectrum") {
      task = spectrum_task(ctx, ops, sp);
    } else if (cfg.task == "solve") {
      task = solve_task(ctx, ops, sp);
    } else if (cfg.task == "multiplicity") {
      task = multiplicity_task(ctx, ops, sp);
    } else if (cfg.task == "nonexist") {
      task = nonexist_task(ctx, ops, sp);
    } else {
      task = compare_task(ctx, ops, sp);
    }
  }

  RunOutcome out;
  out.exit_code = task.exit_code;
  out.record = Json{{"schema", kSchema},
                    {"code_version", ZAKHAROV_VERSION},
                    {"task", cfg.task},
                    {"config_hash", ctx.hash},
                    {"config", config_json(cfg)},
                    {"grid", grid},
                    {"results", task.results},
                    {"exit_code", task.exit_code}};
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.record["timing"] = Json{{"wall_seconds", wall}};
  write_json(out.record, ctx.out / (cfg.task + ".json"));
  return out;
}

RunOutcome run_safely(const ExperimentConfig& cfg)
{
  auto failure = [&](int code, const std::string& msg) {
    RunOutcome out;
    out.exit_code = code;
    out.record = Json{{"schema", kSchema}, {"task", cfg.task}, {"error", msg}, {"exit_code", code}};
    return out;
  };
  try {
    return run(cfg);
  } catch (const ValidationError& e) {
    return failure(ExitValidation, e.what());
  } catch (const SolverError& e) {
    return failure(ExitSolverFailure, e.what());
  } catch (const fs::filesystem_error& e) {
    return failure(ExitValidation, e.what());
  } catch (const std::exception& e) {
    return failure(ExitSolverFailure, e.what());
  }
}

} // namespace zakharov
