#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace zakharov {

/// Thrown when a user-supplied object violates its documented invariants.
class ValidationError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an iterative method cannot reach its stated tolerance.
class SolverError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class BoundaryKind
{
  Dirichlet, ///< clamped: u = du/dn = 0
  Navier     ///< hinged:  u = Laplace(u) = 0
};

std::string to_string(BoundaryKind bc);
BoundaryKind boundary_from_string(const std::string& name);

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Box domain (0,L1) x ... with n interior nodes per axis.
struct DomainSpec
{
  int dimension = 1;
  std::vector<double> extents{3.14159265358979323846};
  BoundaryKind bc = BoundaryKind::Navier;
  int n = 128;

  /// Throws ValidationError naming the offending field.
  void validate() const;

  double spacing(int axis) const { return extents.at(axis) / (n + 1); }
  /// Volume of one grid cell (equal to the nodal quadrature weight).
  double cell_volume() const;
  /// |Omega|.
  double measure() const;
  int node_count() const;

  bool operator==(const DomainSpec&) const = default;
};

/// Scalar grid function on interior nodes. Row-major in 2D, x fastest.
/// Boundary values are implicitly zero.
struct Field
{
  DomainSpec spec;
  Vector values;

  Field() = default;
  Field(DomainSpec s, Vector v);
  /// Zero field on the grid of `s`.
  static Field zeros(const DomainSpec& s);

  /// Node coordinates; `axis` selects x (0) or y (1).
  double coordinate(int node, int axis) const;
};

/// Samples `f(x)` (1D) or `f(x, y)` (2D) at every interior node.
template<class F>
Vector sample(const DomainSpec& spec, F&& f);

/// Discrete operators for one domain.
///
/// `laplacian` is the five/three-point -Laplace with zero boundary values and
/// `bilaplacian` the matching discrete Laplace^2 for the boundary kind. The
/// gradient is represented by edge differences: `edge_diff` maps nodal values
/// to (u_j - u_i)/h on every grid edge touching the interior, and
/// `cell_edges` (cells x edges, weights 1 in 1D and 1/2 in 2D) assembles the
/// squared gradient |grad u|^2 at cell centres as W (D u)^2. D^T D equals the
/// Laplacian exactly, so the cell quadrature of |grad u|^2 reproduces <B u, u>.
///
/// The object is immutable after construction; the stored Cholesky factor of
/// the Laplacian is shared between copies and safe for concurrent solves.
class OperatorSet
{
public:
  explicit OperatorSet(const DomainSpec& spec);

  const DomainSpec& spec() const { return spec_; }
  const SparseMatrix& bilaplacian() const { return A_; }
  const SparseMatrix& laplacian() const { return B_; }
  const SparseMatrix& edge_diff() const { return D_; }
  const SparseMatrix& cell_edges() const { return W_; }
  std::array<double, 2> spacings() const { return h_; }
  double cell_volume() const { return vol_; }
  int size() const { return static_cast<int>(A_.rows()); }
  int cell_count() const { return static_cast<int>(W_.rows()); }

  /// Discrete L2 inner product: vol * sum(a .* b).
  double dot(const Vector& a, const Vector& b) const { return vol_ * a.dot(b); }
  /// Squared X-norm: integral of |Laplace u|^2, i.e. <A u, u>.
  double x_norm_sq(const Vector& u) const;
  double x_norm(const Vector& u) const;
  /// Weighted second-difference factor of the bilaplacian: A = S^T diag(w) S.
  const SparseMatrix& second_diff() const { return S_; }
  const Vector& second_diff_weights() const { return s_weight_; }
  /// A v evaluated as S^T (w .* S v): rounding O(eps / h^2) instead of O(eps / h^4).
  Vector apply_bilaplacian(const Vector& v) const;
  /// Integral of |grad u|^2, i.e. <B u, u>.
  double grad_l2_sq(const Vector& u) const;

  /// Solves A x = b with the cached factorization.
  Vector solve_bilaplacian(const Vector& b) const;
  /// Riesz representative in X of an L2 gradient: A^{-1} g.
  Vector sobolev(const Vector& g) const { return solve_bilaplacian(g); }
  /// Dual norm sqrt(<g, A^{-1} g>); mesh independent measure of a gradient.
  double dual_norm(const Vector& g) const;

  /// Squared gradient at cell centres.
  Vector squared_gradient(const Vector& u) const;

private:
  DomainSpec spec_;
  std::array<double, 2> h_{};
  double vol_ = 0.0;
  SparseMatrix A_;
  SparseMatrix B_;
  SparseMatrix D_;
  SparseMatrix W_;
  SparseMatrix S_;   // second differences with A = S^T diag(s_weight_) S
  Vector s_weight_;
  std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> chol_; // of B
  Eigen::MatrixXd corner_cols_;  // B^-2 [e_1, e_N] (clamped only)
  Eigen::Matrix2d capacitance_;
};

/// Builds the operator set for a validated domain.
OperatorSet build_operators(const DomainSpec& spec);

/// Gradient at cell centres: one entry per cell and axis.
struct GradientField
{
  DomainSpec spec;
  /// components[axis][cell]
  std::vector<Vector> components;

  /// Cell-centre coordinate along `axis`.
  double cell_coordinate(int cell, int axis) const;
  int cell_count() const { return static_cast<int>(components.at(0).size()); }
};

/// Second-order gradient of `u` at cell centres. Differences adjacent to the
/// boundary use the zero boundary value of u.
GradientField gradient_field(const Field& u);

/// Rectangle rule on interior nodes: h^d * sum(f).
double integrate(const Vector& f, const DomainSpec& spec);
/// Midpoint rule on the (n+1)^d cell centres; exact for constants.
double integrate_cells(const Vector& f, const DomainSpec& spec);

// ---------------------------------------------------------------------------

template<class F>
Vector sample(const DomainSpec& spec, F&& f)
{
  spec.validate();
  Vector out(spec.node_count());
  const double hx = spec.spacing(0);
  if constexpr (std::is_invocable_r_v<double, F, double>) {
    if (spec.dimension != 1) {
      throw ValidationError("sample: one-argument function on a 2D grid");
    }
    for (int i = 0; i < spec.n; ++i) {
      out[i] = f((i + 1) * hx);
    }
  } else {
    if (spec.dimension != 2) {
      throw ValidationError("sample: two-argument function on a 1D grid");
    }
    const double hy = spec.spacing(1);
    for (int j = 0; j < spec.n; ++j) {
      for (int i = 0; i < spec.n; ++i) {
        out[j * spec.n + i] = f((i + 1) * hx, (j + 1) * hy);
      }
    }
  }
  return out;
}

} // namespace zakharov
