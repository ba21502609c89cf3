#pragma once

#include "zakharov/grid.hpp"

#include <optional>
#include <string>
#include <utility>

namespace zakharov {

enum class Functional
{
  Zakharov, ///< 1/2|Lu|^2 - (k - w^2)/2 |Du|^2 + k/2 (1 - exp(-|Du|^2))
  Approx1,  ///< 1/2|Lu|^2 + w^2/2 |Du|^2 - k/4 |Du|^4
  Approx2   ///< Approx1 + k/12 |Du|^6
};

std::string to_string(Functional f);
Functional functional_from_string(const std::string& name);

struct ModelParams
{
  double kappa = 1.0;
  double omega_sq = 0.0;
  Functional functional = Functional::Zakharov;

  void validate() const;
  /// Coefficient c in the quadratic part 1/2 <A u,u> - c/2 <B u,u>.
  double linear_shift() const;

  bool operator==(const ModelParams&) const = default;
};

/// Pointwise nonlinearity F(s) of the energy density, s = |grad u|^2, together
/// with F' and F''. All three functionals share the form
///   E(u) = 1/2 <A u,u> - c/2 <B u,u> + integral F(|grad u|^2).
struct Nonlinearity
{
  Functional kind;
  double kappa;

  double value(double s) const;
  double d1(double s) const;
  double d2(double s) const;
};

/// Energy, gradient and Hessian of one functional on one grid. Gradients are
/// L2 Riesz representatives of the derivative of the discrete energy, so
/// ops.dot(gradient(u), v) is exactly the directional derivative along v.
class EnergyModel
{
public:
  EnergyModel(const OperatorSet& ops, const ModelParams& params);

  const OperatorSet& ops() const { return *ops_; }
  const ModelParams& params() const { return params_; }

  double energy(const Vector& u) const;
  Vector gradient(const Vector& u) const;
  Vector hess_vec(const Vector& u, const Vector& v) const;
  /// Energy and gradient sharing one evaluation of |grad u|^2.
  std::pair<double, Vector> energy_and_gradient(const Vector& u) const;

  /// <E'(u), u>.
  double nehari_value(const Vector& u) const { return ops_->dot(gradient(u), u); }

  /// <A u,u> - c <B u,u>: negative exactly when the fibering map of the
  /// Zakharov functional reaches the Nehari set.
  double h_value(const Vector& u) const;

  /// |E'(u)|_{X*}, equal to the X-norm of the Sobolev gradient A^{-1} E'(u).
  double grad_norm(const Vector& u) const { return ops_->dual_norm(gradient(u)); }

private:
  const OperatorSet* ops_;
  ModelParams params_;
  Nonlinearity nl_;
};

double energy(const Field& u, const ModelParams& p, const OperatorSet& ops);
Field gradient(const Field& u, const ModelParams& p, const OperatorSet& ops);
Field hess_vec(const Field& u, const Field& v, const ModelParams& p, const OperatorSet& ops);

/// <E'(u), u>. Throws ValidationError for u = 0.
double nehari_residual(const Field& u, const ModelParams& p, const OperatorSet& ops);

enum class FiberingKind
{
  FirstDownCrossing,
  ClosedForm
};

struct FiberingResult
{
  std::optional<double> t_root;
  std::pair<double, double> bracket{0.0, 0.0};
  FiberingKind kind = FiberingKind::FirstDownCrossing;
  double h_value = 0.0;
  /// Number of downward sign changes seen by the scan (1 for Zakharov, where
  /// g is monotone; reported for inspection otherwise).
  int crossings = 0;
};

struct FiberingOptions
{
  double t_min = 1e-6;
  double t_initial_max = 10.0;
  double t_cap = 1e12;
  int points_per_decade = 400;
  double rel_tol = 1e-12;
};

/// Projects u onto the Nehari set along the ray t u. Approx1 uses the closed
/// form; Zakharov returns no root when h_value >= 0 and otherwise the first
/// downward zero of g(t) = t^{-1} d/dt E(t u); Approx2 scans the same way and
/// returns no root when g stays positive up to `t_cap`. Throws SolverError if
/// a Zakharov scan cannot bracket a root that must exist.
FiberingResult fibering_project(const Field& u, const ModelParams& p, const OperatorSet& ops,
                                const FiberingOptions& opt = {});

/// Generic scanner used for every functional; for Approx1 it cross-checks the
/// closed form.
FiberingResult fibering_scan(const Field& u, const ModelParams& p, const OperatorSet& ops,
                             const FiberingOptions& opt = {});

/// Root of g near `t_guess` for functionals with a single fibering root
/// (Zakharov, where g is decreasing, and Approx1). Empty if none exists.
std::optional<double> fibering_root(const Vector& u, const ModelParams& p, const OperatorSet& ops,
                                    double t_guess = 1.0);

/// g(t) = t^{-1} d/dt E(t u).
double fibering_slope(const Field& u, const ModelParams& p, const OperatorSet& ops, double t);

struct EnergyIdentity
{
  double energy = 0.0;
  double nehari = 0.0;
  /// kappa/2 * integral (1 - exp(-s)(1 + s)), s = |grad u|^2.
  double value = 0.0;
  /// |energy - nehari/2 - value|.
  double gap = 0.0;
};

/// E(u) - 1/2 <E'(u),u> against the closed-form integrand. Zakharov only;
/// other functionals throw ValidationError.
EnergyIdentity energy_identity(const Field& u, const ModelParams& p, const OperatorSet& ops);
double energy_identity_gap(const Field& u, const ModelParams& p, const OperatorSet& ops);

/// u_sigma(x) = u(x / sigma) by linear interpolation of the nodal values
/// (zero outside Omega). The domain origin is the fixed point of the map.
Field dilate(const Field& u, double sigma);

} // namespace zakharov
