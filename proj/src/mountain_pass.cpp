#include "zakharov/solvers.hpp"

#include "descent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace zakharov {

namespace {

// Piecewise-linear path from 0 to an endpoint of negative energy.
struct Path
{
  std::vector<Vector> nodes;
  std::vector<double> energies;

  int size() const { return static_cast<int>(nodes.size()); }

  int argmax_interior() const
  {
    int k = 1;
    for (int j = 2; j + 1 < size(); ++j) {
      if (energies[j] > energies[k]) {
        k = j;
      }
    }
    return k;
  }
};

// Maximizes E along the polyline nodes[k-1] -> nodes[k] -> nodes[k+1] by
// golden-section search and moves node k to the maximizer.
void refine_maximum(Path& path, int k, const EnergyModel& model)
{
  const Vector& left = path.nodes[k - 1];
  const Vector& right = path.nodes[k + 1];
  const Vector centre = path.nodes[k];
  auto point = [&](double s) -> Vector {
    return s < 0.0 ? Vector(centre + (-s) * (left - centre)) : Vector(centre + s * (right - centre));
  };
  auto f = [&](double s) { return model.energy(point(s)); };

  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = -1.0, b = 1.0;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 48; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  const double s = 0.5 * (a + b);
  const double fs = f(s);
  if (fs > path.energies[k]) {
    path.nodes[k] = point(s);
    path.energies[k] = fs;
  }
}

void insert_midpoints(Path& path, int k, const EnergyModel& model)
{
  Vector right_mid = 0.5 * (path.nodes[k] + path.nodes[k + 1]);
  Vector left_mid = 0.5 * (path.nodes[k - 1] + path.nodes[k]);
  const double er = model.energy(right_mid);
  const double el = model.energy(left_mid);
  path.nodes.insert(path.nodes.begin() + k + 1, std::move(right_mid));
  path.energies.insert(path.energies.begin() + k + 1, er);
  path.nodes.insert(path.nodes.begin() + k, std::move(left_mid));
  path.energies.insert(path.energies.begin() + k, el);
}

// Equal X-arclength resampling to `count` nodes, endpoints fixed.
void resample(Path& path, int count, const EnergyModel& model)
{
  const OperatorSet& ops = model.ops();
  std::vector<double> arc(path.size(), 0.0);
  for (int j = 1; j < path.size(); ++j) {
    arc[j] = arc[j - 1] + ops.x_norm(path.nodes[j] - path.nodes[j - 1]);
  }
  Path out;
  int seg = 0;
  for (int i = 0; i < count; ++i) {
    const double target = arc.back() * i / (count - 1);
    while (seg + 2 < path.size() && arc[seg + 1] < target) {
      ++seg;
    }
    const double len = arc[seg + 1] - arc[seg];
    const double w = len > 0.0 ? std::clamp((target - arc[seg]) / len, 0.0, 1.0) : 0.0;
    Vector x = (1.0 - w) * path.nodes[seg] + w * path.nodes[seg + 1];
    if (i == 0) {
      x = path.nodes.front();
    } else if (i == count - 1) {
      x = path.nodes.back();
    }
    out.energies.push_back(model.energy(x));
    out.nodes.push_back(std::move(x));
  }
  path = std::move(out);
}

// A mountain-pass point has Morse index at most one. A converged point with
// a higher index is a saddle the path reached inside a symmetry class; its
// extra unstable directions lead to lower Nehari levels.
SolveReport descend_from_saddle(const ModelParams& p, const OperatorSet& ops, SolveReport best,
                                const SolverConfig& cfg)
{
  for (int round = 0; round < 4; ++round) {
    if (best.status != SolveStatus::Converged || best.morse_index < 2) {
      break;
    }
    const MorseResult mr = morse_analysis(best.solution, p, ops, cfg.morse_m, cfg.morse_tol);
    const double un = ops.x_norm(best.solution.values);
    SolveReport next = best;
    for (int j = 1; j < mr.index; ++j) {
      const Vector v = mr.eigenvectors[j] / ops.x_norm(mr.eigenvectors[j]);
      for (double sign : {1.0, -1.0}) {
        const Field start(ops.spec(), best.solution.values + sign * 0.1 * un * v);
        SolveReport r;
        try {
          r = nehari_descent(p, ops, start, cfg);
        } catch (const ValidationError&) {
          continue;
        }
        if (r.status == SolveStatus::Converged && r.energy < next.energy - 1e-8 * std::abs(next.energy)) {
          next = std::move(r);
        }
      }
    }
    if (next.energy >= best.energy) {
      break;
    }
    next.iterations += best.iterations;
    next.level_trace.insert(next.level_trace.begin(), best.level_trace.begin(), best.level_trace.end());
    best = std::move(next);
  }
  return best;
}

} // namespace

SolveReport mountain_pass_solve(const ModelParams& p, const OperatorSet& ops, const Spectrum& spectrum,
                                const SolverConfig& cfg)
{
  p.validate();
  if (p.functional == Functional::Approx2) {
    throw ValidationError("mountain_pass_solve supports the zakharov and approx1 functionals");
  }
  if (!(spectrum.spec == ops.spec()) || spectrum.pairs.empty()) {
    throw ValidationError("spectrum does not belong to the operator grid");
  }
  if (cfg.path_nodes < 3) {
    throw ValidationError("path_nodes must be at least 3");
  }
  if (p.functional == Functional::Zakharov) {
    const double c = p.linear_shift();
    const double lambda1 = spectrum.lambda(1);
    if (c <= lambda1 + threshold_margin(spectrum, 1, cfg)) {
      std::ostringstream msg;
      msg << "kappa - omegaSq = " << c << " does not exceed lambda_1 = " << lambda1
          << " (margin included): no nonzero solutions exist; use the nonexistence certificate";
      throw BelowThresholdError(msg.str());
    }
  }

  const EnergyModel model(ops, p);
  const Vector& phi = spectrum.phi(1).values;
  double t1 = 1.0;
  for (int d = 0; model.energy(t1 * phi) >= 0.0; ++d) {
    if (d > 200) {
      throw SolverError("no negative-energy endpoint along phi_1");
    }
    t1 *= 2.0;
  }

  Path path;
  const int m = cfg.path_nodes;
  for (int j = 0; j < m; ++j) {
    Vector x = (static_cast<double>(j) / (m - 1)) * (t1 * phi);
    path.energies.push_back(model.energy(x));
    path.nodes.push_back(std::move(x));
  }

  std::vector<double> trace;
  double alpha = 1.0;
  double handoff = cfg.handoff_tol;
  int it = 0;
  SolveReport last;
  last.status = SolveStatus::MaxIter;
  // Top energy before and after the previous descent step.
  double prev_top = std::numeric_limits<double>::infinity();
  double prev_moved = prev_top;
  for (; it < cfg.max_iterations; ++it) {
    int k = path.argmax_interior();
    refine_maximum(path, k, model);
    const double drop = prev_top - prev_moved;
    if (drop > 0.0 && path.energies[k] >= prev_top - 1e-3 * drop) {
      // Re-maximization undid the last step: the polyline is too coarse
      // around the maximum to resolve the move.
      insert_midpoints(path, k, model);
      k = path.argmax_interior();
      refine_maximum(path, k, model);
    }
    const Vector& top = path.nodes[k];
    const auto [e, g] = model.energy_and_gradient(top);
    trace.push_back(e);

    if (e <= 0.0 || std::sqrt(ops.grad_l2_sq(top)) <= cfg.zero_floor) {
      last = summarize(Field(ops.spec(), top), p, ops, cfg);
      last.status = SolveStatus::ZeroCollapse;
      last.message = "path maximum collapsed to the origin";
      break;
    }

    const Vector w = ops.sobolev(g);
    const double gn = std::sqrt(std::max(0.0, ops.dot(g, w)));
    const double scale = std::max(1.0, ops.x_norm(top));
    if (gn <= handoff * scale) {
      SolveReport polished = detail::newton_core(model, top, nullptr, cfg);
      if (polished.status == SolveStatus::Converged) {
        trace.insert(trace.end(), polished.level_trace.begin(), polished.level_trace.end());
        last = std::move(polished);
        break;
      }
      handoff *= 0.01;
      if (gn <= cfg.tol * scale) {
        last = std::move(polished);
        break;
      }
    }

    // Descent orthogonal (in X) to the local path direction.
    Vector tangent = path.nodes[k + 1] - path.nodes[k - 1];
    const double tn = ops.x_norm(tangent);
    Vector dir = w;
    if (tn > 0.0) {
      tangent /= tn;
      dir -= ops.dot(g, tangent) * tangent; // <w, tangent>_X = <g, tangent>
    }
    const double slope = ops.dot(g, dir);
    if (!(slope > 0.0)) {
      dir = w;
    }
    alpha = std::min(1.0, 2.0 * alpha);
    const double target = ops.dot(g, dir);
    Vector moved = top;
    double e_moved = e;
    for (int bt = 0; bt < 60; ++bt) {
      Vector trial = top - alpha * dir;
      const double et = model.energy(trial);
      if (et <= e - 1e-4 * alpha * target) {
        moved = std::move(trial);
        e_moved = et;
        break;
      }
      alpha *= 0.5;
    }
    prev_top = e;
    prev_moved = e_moved;
    path.nodes[k] = std::move(moved);
    path.energies[k] = e_moved;

    const double ek = std::abs(path.energies[k]);
    if (std::abs(path.energies[k - 1] - path.energies[k]) > 0.1 * ek ||
        std::abs(path.energies[k + 1] - path.energies[k]) > 0.1 * ek) {
      insert_midpoints(path, k, model);
    }
    if (path.size() > 4 * m) {
      resample(path, 2 * m, model);
    }
  }

  if (it == cfg.max_iterations) {
    const int k = path.argmax_interior();
    last = summarize(Field(ops.spec(), path.nodes[k]), p, ops, cfg);
    last.message = "mountain pass iteration limit reached";
  }
  last.iterations = it;
  last.level_trace = std::move(trace);
  return descend_from_saddle(p, ops, std::move(last), cfg);
}

} // namespace zakharov
