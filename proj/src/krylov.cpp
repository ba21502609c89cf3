#include "zakharov/krylov.hpp"

#include "zakharov/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace zakharov {

MinresResult minres(const LinearOperator& op, const Vector& rhs, const LinearOperator& precond,
                    double rel_tol, int max_iterations)
{
  const Eigen::Index n = rhs.size();
  MinresResult res;
  res.x = Vector::Zero(n);

  Vector v_prev = Vector::Zero(n);
  Vector v = rhs;
  Vector z = precond(v);
  double gamma = std::sqrt(std::max(0.0, z.dot(v)));
  if (gamma == 0.0) {
    res.converged = true;
    return res;
  }
  const double gamma1 = gamma;
  double gamma_prev = 1.0;
  double eta = gamma;
  double s_prev = 0.0, s = 0.0;
  double c_prev = 1.0, c = 1.0;
  Vector w_prev = Vector::Zero(n);
  Vector w = Vector::Zero(n);

  for (int j = 1; j <= max_iterations; ++j) {
    z /= gamma;
    const Vector Az = op(z);
    const double delta = Az.dot(z);
    Vector v_next = Az - (delta / gamma) * v - (gamma / gamma_prev) * v_prev;
    Vector z_next = precond(v_next);
    const double gamma_next = std::sqrt(std::max(0.0, z_next.dot(v_next)));

    const double a0 = c * delta - c_prev * s * gamma;
    const double a1 = std::sqrt(a0 * a0 + gamma_next * gamma_next);
    const double a2 = s * delta + c_prev * c * gamma;
    const double a3 = s_prev * gamma;
    if (a1 == 0.0) {
      break;
    }
    const double c_next = a0 / a1;
    const double s_next = gamma_next / a1;
    Vector w_next = (z - a3 * w_prev - a2 * w) / a1;
    res.x += c_next * eta * w_next;
    eta = -s_next * eta;

    res.iterations = j;
    res.relative_residual = std::abs(eta) / gamma1;
    if (res.relative_residual <= rel_tol) {
      res.converged = true;
      break;
    }
    if (gamma_next == 0.0) {
      // invariant subspace reached: x is the exact solution in it
      res.converged = true;
      break;
    }

    v_prev = std::move(v);
    v = std::move(v_next);
    z = std::move(z_next);
    w_prev = std::move(w);
    w = std::move(w_next);
    gamma_prev = gamma;
    gamma = gamma_next;
    s_prev = s;
    s = s_next;
    c_prev = c;
    c = c_next;
  }
  return res;
}

KrylovEigenResult smallest_eigenpairs(const LinearOperator& h_apply, const LinearOperator& m_apply,
                                      const LinearOperator& m_solve, const LinearOperator& expand,
                                      int size, const KrylovEigenOptions& opt)
{
  std::vector<Vector> V;  // M-orthonormal basis
  std::vector<Vector> MV; // M * basis
  std::vector<Vector> HV; // H * basis
  std::vector<std::vector<double>> proj; // lower triangle of V^T H V
  const int limit = std::min(size, opt.max_basis);

  // Adds x to the basis after two passes of M-orthogonalization; returns false
  // when x is (numerically) already in the span.
  auto push = [&](Vector x) {
    const double before = std::sqrt(std::max(0.0, x.dot(m_apply(x))));
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < V.size(); ++i) {
        x -= MV[i].dot(x) * V[i];
      }
    }
    Vector mx = m_apply(x);
    const double norm = std::sqrt(std::max(0.0, x.dot(mx)));
    if (!(norm > 1e-10 * before) || norm == 0.0) {
      return false;
    }
    x /= norm;
    mx /= norm;
    Vector hx = h_apply(x);
    std::vector<double> row;
    for (std::size_t i = 0; i < V.size(); ++i) {
      row.push_back(0.5 * (x.dot(HV[i]) + V[i].dot(hx)));
    }
    row.push_back(x.dot(hx));
    proj.push_back(std::move(row));
    HV.push_back(std::move(hx));
    V.push_back(std::move(x));
    MV.push_back(std::move(mx));
    return true;
  };

  Rng rng(opt.seed);
  std::vector<std::size_t> block;
  for (int b = 0; b < opt.block_size && static_cast<int>(V.size()) < limit; ++b) {
    Vector x(size);
    for (int i = 0; i < size; ++i) {
      x[i] = rng.uniform(-1.0, 1.0);
    }
    if (push(std::move(x))) {
      block.push_back(V.size() - 1);
    }
  }

  KrylovEigenResult out;
  const int wanted = std::min(opt.wanted, size);
  int last_extraction = 0;
  while (true) {
    const int k = static_cast<int>(V.size());
    const bool due = k >= std::min(limit, wanted + opt.block_size) && k - last_extraction >= 12;
    if (due || k == limit || block.empty()) {
      last_extraction = k;
      Eigen::MatrixXd T(k, k);
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j <= i; ++j) {
          T(i, j) = T(j, i) = proj[i][j];
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      const int count = std::min(wanted, k);
      out.values.clear();
      out.vectors.clear();
      out.residuals.clear();
      bool all = true;
      for (int e = 0; e < count; ++e) {
        Vector y = Vector::Zero(size);
        Vector hy = Vector::Zero(size);
        for (int i = 0; i < k; ++i) {
          y += es.eigenvectors()(i, e) * V[i];
          hy += es.eigenvectors()(i, e) * HV[i];
        }
        const double mu = es.eigenvalues()[e];
        const Vector r = hy - mu * m_apply(y);
        const double rn = std::sqrt(std::max(0.0, r.dot(m_solve(r))));
        out.values.push_back(mu);
        out.vectors.push_back(std::move(y));
        out.residuals.push_back(rn);
        all = all && rn <= opt.tol * std::max(1.0, std::abs(mu));
      }
      if (all || k == limit || block.empty()) {
        out.converged = all;
        return out;
      }
    }

    std::vector<std::size_t> next;
    for (std::size_t idx : block) {
      if (static_cast<int>(V.size()) >= limit) {
        break;
      }
      if (push(expand(V[idx]))) {
        next.push_back(V.size() - 1);
      }
    }
    block = std::move(next);
  }
}

} // namespace zakharov
