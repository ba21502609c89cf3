#include "zakharov/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace zakharov {

std::string to_string(Functional f)
{
  switch (f) {
    case Functional::Zakharov:
      return "zakharov";
    case Functional::Approx1:
      return "approx1";
    case Functional::Approx2:
      return "approx2";
  }
  return "unknown";
}

Functional functional_from_string(const std::string& name)
{
  if (name == "zakharov") {
    return Functional::Zakharov;
  }
  if (name == "approx1") {
    return Functional::Approx1;
  }
  if (name == "approx2") {
    return Functional::Approx2;
  }
  throw ValidationError("functional must be one of zakharov, approx1, approx2; got \"" + name + "\"");
}

void ModelParams::validate() const
{
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw ValidationError("kappa must be positive");
  }
  if (!std::isfinite(omega_sq)) {
    throw ValidationError("omegaSq must be finite");
  }
}

double ModelParams::linear_shift() const
{
  return functional == Functional::Zakharov ? kappa - omega_sq : -omega_sq;
}

double Nonlinearity::value(double s) const
{
  switch (kind) {
    case Functional::Zakharov:
      return -0.5 * kappa * std::expm1(-s);
    case Functional::Approx1:
      return -0.25 * kappa * s * s;
    case Functional::Approx2:
      return kappa * s * s * (s / 12.0 - 0.25);
  }
  return 0.0;
}

double Nonlinearity::d1(double s) const
{
  switch (kind) {
    case Functional::Zakharov:
      return 0.5 * kappa * std::exp(-s);
    case Functional::Approx1:
      return -0.5 * kappa * s;
    case Functional::Approx2:
      return kappa * s * (0.25 * s - 0.5);
  }
  return 0.0;
}

double Nonlinearity::d2(double s) const
{
  switch (kind) {
    case Functional::Zakharov:
      return -0.5 * kappa * std::exp(-s);
    case Functional::Approx1:
      return -0.5 * kappa;
    case Functional::Approx2:
      return kappa * (0.5 * s - 0.5);
  }
  return 0.0;
}

EnergyModel::EnergyModel(const OperatorSet& ops, const ModelParams& params)
  : ops_(&ops)
  , params_(params)
  , nl_{params.functional, params.kappa}
{
  params_.validate();
}

double EnergyModel::energy(const Vector& u) const
{
  const Vector s = ops_->squared_gradient(u);
  double nonlinear = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    nonlinear += nl_.value(s[i]);
  }
  const double c = params_.linear_shift();
  return 0.5 * ops_->x_norm_sq(u) - 0.5 * c * ops_->grad_l2_sq(u) + ops_->cell_volume() * nonlinear;
}

Vector EnergyModel::gradient(const Vector& u) const
{
  return energy_and_gradient(u).second;
}

std::pair<double, Vector> EnergyModel::energy_and_gradient(const Vector& u) const
{
  const OperatorSet& o = *ops_;
  const Vector du = o.edge_diff() * u;
  const Vector s = o.cell_edges() * du.cwiseAbs2();
  Vector f1(s.size());
  double nonlinear = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    f1[i] = nl_.d1(s[i]);
    nonlinear += nl_.value(s[i]);
  }
  // d/du sum_c F(s_c) = D^T [ 2 (D u) .* W^T F'(s) ]
  const Vector edge_weight = o.cell_edges().transpose() * f1;
  const Vector Au = o.apply_bilaplacian(u);
  const Vector Bu = o.laplacian() * u;
  const double c = params_.linear_shift();
  Vector g = Au - c * Bu + o.edge_diff().transpose() * (2.0 * du.cwiseProduct(edge_weight));
  const double e = 0.5 * o.x_norm_sq(u) - 0.5 * c * o.cell_volume() * du.squaredNorm() +
                   o.cell_volume() * nonlinear;
  return {e, std::move(g)};
}

Vector EnergyModel::hess_vec(const Vector& u, const Vector& v) const
{
  const OperatorSet& o = *ops_;
  const Vector du = o.edge_diff() * u;
  const Vector dv = o.edge_diff() * v;
  const Vector s = o.cell_edges() * du.cwiseAbs2();
  const Vector ds = o.cell_edges() * (2.0 * du.cwiseProduct(dv));
  Vector f1(s.size());
  Vector f2ds(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    f1[i] = nl_.d1(s[i]);
    f2ds[i] = nl_.d2(s[i]) * ds[i];
  }
  const Vector w1 = o.cell_edges().transpose() * f1;
  const Vector w2 = o.cell_edges().transpose() * f2ds;
  const Vector edge_term = 2.0 * (dv.cwiseProduct(w1) + du.cwiseProduct(w2));
  const double c = params_.linear_shift();
  return o.apply_bilaplacian(v) - c * (o.laplacian() * v) + o.edge_diff().transpose() * edge_term;
}

double EnergyModel::h_value(const Vector& u) const
{
  return ops_->x_norm_sq(u) - params_.linear_shift() * ops_->grad_l2_sq(u);
}

namespace {

void check_field(const Field& u, const OperatorSet& ops)
{
  if (!(u.spec == ops.spec())) {
    throw ValidationError("field and operators live on different grids");
  }
  if (u.values.size() != ops.size()) {
    throw ValidationError("field length does not match the operator grid");
  }
}

void require_nonzero(const Field& u, const char* what)
{
  if (u.values.isZero(0.0)) {
    throw ValidationError(std::string(what) + " is undefined for the zero field");
  }
}

} // namespace

double energy(const Field& u, const ModelParams& p, const OperatorSet& ops)
{
  check_field(u, ops);
  return EnergyModel(ops, p).energy(u.values);
}

Field gradient(const Field& u, const ModelParams& p, const OperatorSet& ops)
{
  check_field(u, ops);
  return Field(ops.spec(), EnergyModel(ops, p).gradient(u.values));
}

Field hess_vec(const Field& u, const Field& v, const ModelParams& p, const OperatorSet& ops)
{
  check_field(u, ops);
  check_field(v, ops);
  return Field(ops.spec(), EnergyModel(ops, p).hess_vec(u.values, v.values));
}

double nehari_residual(const Field& u, const ModelParams& p, const OperatorSet& ops)
{
  check_field(u, ops);
  require_nonzero(u, "nehari_residual");
  return EnergyModel(ops, p).nehari_value(u.values);
}

namespace {

struct FiberingData
{
  double h = 0.0;     // <A u,u> - c <B u,u>
  double scale = 0.0; // magnitude of the terms of g, for tolerances
  Vector s;           // |grad u|^2 per cell
  double vol = 0.0;
  Nonlinearity nl{};
};

FiberingData fibering_data(const Field& u, const ModelParams& p, const OperatorSet& ops)
{
  check_field(u, ops);
  p.validate();
  require_nonzero(u, "fibering projection");
  FiberingData d;
  const double a = ops.x_norm_sq(u.values);
  const double b = ops.grad_l2_sq(u.values);
  const double c = p.linear_shift();
  d.h = a - c * b;
  d.scale = a + std::abs(c) * b + p.kappa * b;
  d.s = ops.squared_gradient(u.values);
  d.vol = ops.cell_volume();
  d.nl = Nonlinearity{p.functional, p.kappa};
  return d;
}

double slope(const FiberingData& d, double t)
{
  const double t2 = t * t;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < d.s.size(); ++i) {
    acc += d.s[i] * d.nl.d1(t2 * d.s[i]);
  }
  return d.h + 2.0 * d.vol * acc;
}

double bisect(const FiberingData& d, double lo, double hi, double tol)
{
  // g(lo) > 0 >= g(hi)
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = slope(d, mid);
    if (std::abs(g) <= tol || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      return mid;
    }
    (g > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

FiberingResult scan(const FiberingData& d, const ModelParams& p, const FiberingOptions& opt)
{
  FiberingResult r;
  r.kind = FiberingKind::FirstDownCrossing;
  r.h_value = d.h;

  double t_lo = opt.t_min;
  // g(0+) > 0 for every functional here; make sure the scan starts there.
  while (slope(d, t_lo) <= 0.0 && t_lo > 1e-150) {
    t_lo *= 1e-3;
  }
  const double ratio = std::pow(10.0, 1.0 / opt.points_per_decade);
  double t_hi = std::max(opt.t_initial_max, t_lo * 10.0);

  double prev_t = t_lo;
  double prev_g = slope(d, t_lo);
  double t = t_lo;
  bool found = false;
  const double tol = opt.rel_tol * d.scale;
  while (true) {
    while (t < t_hi) {
      t *= ratio;
      const double g = slope(d, t);
      if (prev_g > 0.0 && g <= 0.0) {
        ++r.crossings;
        if (!found) {
          found = true;
          r.bracket = {prev_t, t};
          r.t_root = bisect(d, prev_t, t, tol);
        }
      }
      prev_t = t;
      prev_g = g;
    }
    if (found) {
      break;
    }
    // Zakharov: g(T) -> h < 0, so doubling the range must bracket the root.
    // Approx2: g may stay positive forever.
    if (t_hi >= opt.t_cap) {
      break;
    }
    t_hi = std::min(2.0 * t_hi, opt.t_cap);
  }

  if (!found && p.functional != Functional::Approx2) {
    std::ostringstream msg;
    msg << "fibering scan exhausted at t = " << t_hi << " without a sign change (h = " << d.h << ")";
    throw SolverError(msg.str());
  }
  return r;
}

} // namespace

std::optional<double> fibering_root(const Vector& u, const ModelParams& p, const OperatorSet& ops,
                                    double t_guess)
{
  if (p.functional == Functional::Approx2) {
    throw ValidationError("fibering_root: approx2 fibering maps may have several roots");
  }
  const FiberingData d = fibering_data(Field(ops.spec(), u), p, ops);
  if (p.functional == Functional::Approx1) {
    const double quartic = p.kappa * d.vol * d.s.squaredNorm();
    if (!(d.h > 0.0 && quartic > 0.0)) {
      return std::nullopt;
    }
    return std::sqrt(d.h / quartic);
  }
  if (d.h >= 0.0) {
    return std::nullopt;
  }
  double lo = t_guess > 0.0 ? t_guess : 1.0;
  double hi = lo;
  while (slope(d, lo) <= 0.0) {
    lo *= 0.5;
    if (lo < 1e-200) {
      return std::nullopt;
    }
  }
  while (slope(d, hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e200) {
      return std::nullopt;
    }
  }
  return bisect(d, lo, hi, 1e-13 * d.scale);
}

double fibering_slope(const Field& u, const ModelParams& p, const OperatorSet& ops, double t)
{
  return slope(fibering_data(u, p, ops), t);
}

FiberingResult fibering_scan(const Field& u, const ModelParams& p, const OperatorSet& ops,
                             const FiberingOptions& opt)
{
  const FiberingData d = fibering_data(u, p, ops);
  if (p.functional == Functional::Zakharov && d.h >= 0.0) {
    FiberingResult r;
    r.h_value = d.h;
    return r;
  }
  return scan(d, p, opt);
}

FiberingResult fibering_project(const Field& u, const ModelParams& p, const OperatorSet& ops,
                                const FiberingOptions& opt)
{
  const FiberingData d = fibering_data(u, p, ops);
  if (p.functional == Functional::Approx1) {
    // g(t) = h - kappa t^2 integral s^2 with h = <A u,u> + w^2 <B u,u>
    const double quartic = p.kappa * d.vol * d.s.squaredNorm();
    FiberingResult r;
    r.kind = FiberingKind::ClosedForm;
    r.h_value = d.h;
    if (d.h > 0.0 && quartic > 0.0) {
      const double t = std::sqrt(d.h / quartic);
      r.t_root = t;
      r.bracket = {t, t};
      r.crossings = 1;
    }
    return r;
  }
  if (p.functional == Functional::Zakharov && d.h >= 0.0) {
    FiberingResult r;
    r.h_value = d.h;
    return r;
  }
  return scan(d, p, opt);
}

EnergyIdentity energy_identity(const Field& u, const ModelParams& p, const OperatorSet& ops)
{
  check_field(u, ops);
  if (p.functional != Functional::Zakharov) {
    throw ValidationError("the energy identity applies to the zakharov functional only");
  }
  const EnergyModel model(ops, p);
  EnergyIdentity id;
  id.energy = model.energy(u.values);
  id.nehari = model.nehari_value(u.values);
  const Vector s = ops.squared_gradient(u.values);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    // 1 - e^{-s}(1 + s), written to keep accuracy for small s
    acc += -std::expm1(-s[i]) - s[i] * std::exp(-s[i]);
  }
  id.value = 0.5 * p.kappa * ops.cell_volume() * acc;
  id.gap = std::abs(id.energy - 0.5 * id.nehari - id.value);
  return id;
}

double energy_identity_gap(const Field& u, const ModelParams& p, const OperatorSet& ops)
{
  return energy_identity(u, p, ops).gap;
}

Field dilate(const Field& u, double sigma)
{
  if (!(sigma > 0.0 && sigma <= 1.0)) {
    throw ValidationError("sigma must lie in (0, 1]");
  }
  const DomainSpec& s = u.spec;
  const int n = s.n;
  auto at = [&](int i, int j) {
    if (i < 1 || i > n || (s.dimension == 2 && (j < 1 || j > n))) {
      return 0.0;
    }
    return s.dimension == 1 ? u.values[i - 1] : u.values[(j - 1) * n + (i - 1)];
  };
  // x / sigma in full-grid index units, split into cell and weight; the
  // map is the same along both axes.
  auto locate = [&](int node_index, int& cell, double& w) {
    const double q = (node_index + 1) / sigma; // (x / sigma) / h
    if (q >= n + 1) {
      cell = -1;
      return;
    }
    cell = static_cast<int>(std::floor(q));
    w = q - cell;
  };

  Vector out = Vector::Zero(u.values.size());
  if (s.dimension == 1) {
    for (int i = 0; i < n; ++i) {
      int c;
      double w = 0.0;
      locate(i, c, w);
      if (c >= 0) {
        out[i] = (1.0 - w) * at(c, 0) + w * at(c + 1, 0);
      }
    }
  } else {
    for (int j = 0; j < n; ++j) {
      int cy;
      double wy = 0.0;
      locate(j, cy, wy);
      if (cy < 0) {
        continue;
      }
      for (int i = 0; i < n; ++i) {
        int cx;
        double wx = 0.0;
        locate(i, cx, wx);
        if (cx < 0) {
          continue;
        }
        out[j * n + i] = (1.0 - wy) * ((1.0 - wx) * at(cx, cy) + wx * at(cx + 1, cy)) +
                         wy * ((1.0 - wx) * at(cx, cy + 1) + wx * at(cx + 1, cy + 1));
      }
    }
  }
  return Field(s, std::move(out));
}

} // namespace zakharov
