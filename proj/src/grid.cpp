#include "zakharov/grid.hpp"

#include <cmath>
#include <numeric>

namespace zakharov {

std::string to_string(BoundaryKind bc)
{
  return bc == BoundaryKind::Dirichlet ? "dirichlet" : "navier";
}

BoundaryKind boundary_from_string(const std::string& name)
{
  if (name == "dirichlet" || name == "Dirichlet") {
    return BoundaryKind::Dirichlet;
  }
  if (name == "navier" || name == "Navier") {
    return BoundaryKind::Navier;
  }
  throw ValidationError("bc must be \"dirichlet\" or \"navier\", got \"" + name + "\"");
}

void DomainSpec::validate() const
{
  if (dimension != 1 && dimension != 2) {
    throw ValidationError("dimension must be 1 or 2");
  }
  if (static_cast<int>(extents.size()) != dimension) {
    throw ValidationError("extents must have one entry per dimension");
  }
  for (double L : extents) {
    if (!(L > 0.0) || !std::isfinite(L)) {
      throw ValidationError("extents must be positive and finite");
    }
  }
  if (n < 8) {
    throw ValidationError("n must be at least 8");
  }
  if (dimension == 2 && bc == BoundaryKind::Dirichlet) {
    throw ValidationError("2D domains support only navier boundary conditions");
  }
}

double DomainSpec::cell_volume() const
{
  double v = 1.0;
  for (int a = 0; a < dimension; ++a) {
    v *= spacing(a);
  }
  return v;
}

double DomainSpec::measure() const
{
  return std::accumulate(extents.begin(), extents.end(), 1.0, std::multiplies<>());
}

int DomainSpec::node_count() const
{
  return dimension == 1 ? n : n * n;
}

Field::Field(DomainSpec s, Vector v)
  : spec(std::move(s))
  , values(std::move(v))
{
  spec.validate();
  if (values.size() != spec.node_count()) {
    throw ValidationError("field length does not match the grid");
  }
  if (!values.allFinite()) {
    throw ValidationError("field contains non-finite values");
  }
}

Field Field::zeros(const DomainSpec& s)
{
  s.validate();
  return Field(s, Vector::Zero(s.node_count()));
}

double Field::coordinate(int node, int axis) const
{
  const int idx = axis == 0 ? node % spec.n : node / spec.n;
  return (idx + 1) * spec.spacing(axis);
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// 1D edge e joins full-grid nodes e and e+1; interior node k sits at full index k+1.
void add_edge(Triplets& t, int row, int left, int right, double inv_h)
{
  if (left >= 0) {
    t.emplace_back(row, left, -inv_h);
  }
  if (right >= 0) {
    t.emplace_back(row, right, inv_h);
  }
}

SparseMatrix from_triplets(int rows, int cols, const Triplets& t)
{
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

SparseMatrix clamped_bilaplacian_1d(int n, double h)
{
  // [1,-4,6,-4,1]/h^4 with ghost reflection u_{-1} = u_1 at each end.
  const double s = 1.0 / (h * h * h * h);
  Triplets t;
  for (int i = 0; i < n; ++i) {
    const bool edge = (i == 0 || i == n - 1);
    t.emplace_back(i, i, (edge ? 7.0 : 6.0) * s);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, -4.0 * s);
      t.emplace_back(i + 1, i, -4.0 * s);
    }
    if (i + 2 < n) {
      t.emplace_back(i, i + 2, s);
      t.emplace_back(i + 2, i, s);
    }
  }
  return from_triplets(n, n, t);
}

// Floating-point sums in sparse products need not be order independent;
// (M + M^T)/2 is exactly symmetric.
SparseMatrix symmetrized(const SparseMatrix& m)
{
  SparseMatrix t = m.transpose();
  SparseMatrix s = 0.5 * (m + t);
  s.prune(0.0);
  s.makeCompressed();
  return s;
}

} // namespace

OperatorSet::OperatorSet(const DomainSpec& spec)
  : spec_(spec)
{
  spec_.validate();
  const int n = spec_.n;
  const int N = spec_.node_count();
  h_ = {spec_.spacing(0), spec_.dimension == 2 ? spec_.spacing(1) : 0.0};
  vol_ = spec_.cell_volume();

  Triplets dt;
  Triplets wt;
  if (spec_.dimension == 1) {
    const double inv_h = 1.0 / h_[0];
    for (int e = 0; e <= n; ++e) {
      add_edge(dt, e, e - 1 < 0 ? -1 : e - 1, e < n ? e : -1, inv_h);
      wt.emplace_back(e, e, 1.0);
    }
    D_ = from_triplets(n + 1, N, dt);
    W_ = from_triplets(n + 1, n + 1, wt);
  } else {
    // x-edges on interior rows r = 1..n between full-grid columns i and i+1;
    // y-edges on interior columns c = 1..n between full-grid rows j and j+1.
    const int per_line = n + 1;
    const int n_xedges = n * per_line;
    auto xedge = [&](int row, int i) { return (row - 1) * per_line + i; };
    auto yedge = [&](int col, int j) { return n_xedges + (col - 1) * per_line + j; };
    auto node = [&](int i, int j) {
      return (i >= 1 && i <= n && j >= 1 && j <= n) ? (j - 1) * n + (i - 1) : -1;
    };
    for (int row = 1; row <= n; ++row) {
      for (int i = 0; i <= n; ++i) {
        add_edge(dt, xedge(row, i), node(i, row), node(i + 1, row), 1.0 / h_[0]);
      }
    }
    for (int col = 1; col <= n; ++col) {
      for (int j = 0; j <= n; ++j) {
        add_edge(dt, yedge(col, j), node(col, j), node(col, j + 1), 1.0 / h_[1]);
      }
    }
    for (int cj = 0; cj <= n; ++cj) {
      for (int ci = 0; ci <= n; ++ci) {
        const int cell = cj * per_line + ci;
        for (int row : {cj, cj + 1}) {
          if (row >= 1 && row <= n) {
            wt.emplace_back(cell, xedge(row, ci), 0.5);
          }
        }
        for (int col : {ci, ci + 1}) {
          if (col >= 1 && col <= n) {
            wt.emplace_back(cell, yedge(col, cj), 0.5);
          }
        }
      }
    }
    D_ = from_triplets(2 * n_xedges, N, dt);
    W_ = from_triplets(per_line * per_line, 2 * n_xedges, wt);
  }

  B_ = symmetrized(SparseMatrix(D_.transpose() * D_));
  if (spec_.bc == BoundaryKind::Navier) {
    A_ = symmetrized(SparseMatrix(B_ * B_));
    S_ = B_;
    s_weight_ = Vector::Ones(N);
  } else {
    A_ = clamped_bilaplacian_1d(n, h_[0]);
    // Second differences at the boundary nodes see the ghost value:
    // (u_1 - 2 u_0 + u_{-1}) / h^2 = 2 u_1 / h^2. With trapezoid weight 1/2
    // they supply the extra 2/h^4 on the ends of the clamped stencil.
    const double inv_h2 = 1.0 / (h_[0] * h_[0]);
    Triplets st;
    st.emplace_back(0, 0, 2.0 * inv_h2);
    for (int k = 0; k < B_.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(B_, k); it; ++it) {
        st.emplace_back(it.row() + 1, it.col(), it.value());
      }
    }
    st.emplace_back(n + 1, n - 1, 2.0 * inv_h2);
    S_ = from_triplets(n + 2, N, st);
    s_weight_ = Vector::Ones(n + 2);
    s_weight_[0] = s_weight_[n + 1] = 0.5;
  }

  // Solves go through B twice (A = B^2 for Navier): cond(B) ~ h^-2 instead of
  // cond(A) ~ h^-4. The clamped ends add 2/h^4 to the two corner entries,
  // a rank-2 update handled by Sherman-Morrison-Woodbury.
  auto chol = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(B_);
  if (chol->info() != Eigen::Success) {
    throw SolverError("factorization of the Laplacian failed");
  }
  chol_ = std::move(chol);
  if (spec_.bc == BoundaryKind::Dirichlet) {
    const double corner = 2.0 / (h_[0] * h_[0] * h_[0] * h_[0]);
    corner_cols_ = Eigen::MatrixXd::Zero(N, 2);
    corner_cols_(0, 0) = 1.0;
    corner_cols_(N - 1, 1) = 1.0;
    for (int j = 0; j < 2; ++j) {
      corner_cols_.col(j) = chol_->solve(Vector(chol_->solve(Vector(corner_cols_.col(j)))));
    }
    Eigen::Matrix2d K;
    K << corner_cols_(0, 0), corner_cols_(0, 1), corner_cols_(N - 1, 0), corner_cols_(N - 1, 1);
    K += Eigen::Matrix2d::Identity() / corner;
    capacitance_ = K.inverse();
  }
}

double OperatorSet::x_norm_sq(const Vector& u) const
{
  // A = S^T diag(w) S; summing squares avoids the h^-4 cancellation in A u.
  const Vector su = S_ * u;
  return vol_ * su.cwiseAbs2().dot(s_weight_);
}

Vector OperatorSet::apply_bilaplacian(const Vector& v) const
{
  const Vector sv = S_ * v;
  return S_.transpose() * sv.cwiseProduct(s_weight_);
}

double OperatorSet::x_norm(const Vector& u) const
{
  return std::sqrt(std::max(0.0, x_norm_sq(u)));
}

double OperatorSet::grad_l2_sq(const Vector& u) const
{
  const Vector du = D_ * u;
  return vol_ * du.squaredNorm();
}

Vector OperatorSet::solve_bilaplacian(const Vector& b) const
{
  Vector x = chol_->solve(Vector(chol_->solve(b)));
  if (spec_.bc == BoundaryKind::Dirichlet) {
    const Eigen::Vector2d ends(x[0], x[x.size() - 1]);
    x -= corner_cols_ * (capacitance_ * ends);
  }
  return x;
}

double OperatorSet::dual_norm(const Vector& g) const
{
  return std::sqrt(std::max(0.0, dot(g, solve_bilaplacian(g))));
}

Vector OperatorSet::squared_gradient(const Vector& u) const
{
  const Vector du = D_ * u;
  return W_ * du.cwiseAbs2();
}

OperatorSet build_operators(const DomainSpec& spec)
{
  return OperatorSet(spec);
}

double GradientField::cell_coordinate(int cell, int axis) const
{
  const int per_line = spec.n + 1;
  const int idx = axis == 0 ? cell % per_line : cell / per_line;
  return (idx + 0.5) * spec.spacing(axis);
}

GradientField gradient_field(const Field& u)
{
  const DomainSpec& s = u.spec;
  s.validate();
  const int n = s.n;
  const int per_line = n + 1;
  // Nodal value on the full grid including the zero boundary.
  auto at = [&](int i, int j) {
    if (i < 1 || i > n) {
      return 0.0;
    }
    if (s.dimension == 1) {
      return u.values[i - 1];
    }
    if (j < 1 || j > n) {
      return 0.0;
    }
    return u.values[(j - 1) * n + (i - 1)];
  };

  GradientField g{s, {}};
  const double hx = s.spacing(0);
  if (s.dimension == 1) {
    Vector gx(per_line);
    for (int c = 0; c <= n; ++c) {
      gx[c] = (at(c + 1, 0) - at(c, 0)) / hx;
    }
    g.components.push_back(std::move(gx));
    return g;
  }

  const double hy = s.spacing(1);
  Vector gx(per_line * per_line);
  Vector gy(per_line * per_line);
  for (int cj = 0; cj <= n; ++cj) {
    for (int ci = 0; ci <= n; ++ci) {
      const int c = cj * per_line + ci;
      gx[c] = 0.5 * ((at(ci + 1, cj) - at(ci, cj)) + (at(ci + 1, cj + 1) - at(ci, cj + 1))) / hx;
      gy[c] = 0.5 * ((at(ci, cj + 1) - at(ci, cj)) + (at(ci + 1, cj + 1) - at(ci + 1, cj))) / hy;
    }
  }
  g.components.push_back(std::move(gx));
  g.components.push_back(std::move(gy));
  return g;
}

double integrate(const Vector& f, const DomainSpec& spec)
{
  if (f.size() != spec.node_count()) {
    throw ValidationError("integrate: expected one value per interior node");
  }
  return spec.cell_volume() * f.sum();
}

double integrate_cells(const Vector& f, const DomainSpec& spec)
{
  const int per_line = spec.n + 1;
  if (f.size() != (spec.dimension == 1 ? per_line : per_line * per_line)) {
    throw ValidationError("integrate_cells: expected one value per cell");
  }
  return spec.cell_volume() * f.sum();
}

} // namespace zakharov
