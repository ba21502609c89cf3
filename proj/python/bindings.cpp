#include "zakharov/experiment.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace zakharov;

namespace {

Field field(const OperatorSet& ops, const Vector& v)
{
  return Field(ops.spec(), v);
}

py::dict report_dict(const SolveReport& r)
{
  py::dict d;
  d["u"] = r.solution.values;
  d["energy"] = r.energy;
  d["grad_norm"] = r.grad_norm;
  d["nehari_res"] = r.nehari_res;
  d["morse_index"] = r.morse_index;
  d["morse_eigenvalues"] = r.morse_eigenvalues;
  d["iterations"] = r.iterations;
  d["status"] = to_string(r.status);
  d["message"] = r.message;
  return d;
}

} // namespace

PYBIND11_MODULE(_zakharov, m)
{
  m.doc() = "Finite-difference variational solver for the stationary Zakharov equation";

  // Later translators are tried first, so the subclass goes last.
  auto& invalid = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<BelowThresholdError>(m, "BelowThresholdError", invalid.ptr());
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::enum_<BoundaryKind>(m, "BoundaryKind")
    .value("Navier", BoundaryKind::Navier)
    .value("Dirichlet", BoundaryKind::Dirichlet);
  py::enum_<Functional>(m, "Functional")
    .value("Zakharov", Functional::Zakharov)
    .value("Approx1", Functional::Approx1)
    .value("Approx2", Functional::Approx2);

  py::class_<DomainSpec>(m, "DomainSpec")
    .def(py::init([](int dimension, std::vector<double> extents, BoundaryKind bc, int n) {
           DomainSpec d;
           d.dimension = dimension;
           d.extents = std::move(extents);
           d.bc = bc;
           d.n = n;
           d.validate();
           return d;
         }),
         py::arg("dimension") = 1, py::arg("extents") = std::vector<double>{3.14159265358979323846},
         py::arg("bc") = BoundaryKind::Navier, py::arg("n") = 128)
    .def_readonly("dimension", &DomainSpec::dimension)
    .def_readonly("extents", &DomainSpec::extents)
    .def_readonly("bc", &DomainSpec::bc)
    .def_readonly("n", &DomainSpec::n)
    .def("spacing", &DomainSpec::spacing);

  py::class_<ModelParams>(m, "ModelParams")
    .def(py::init([](double kappa, double omega_sq, Functional f) {
           ModelParams p;
           p.kappa = kappa;
           p.omega_sq = omega_sq;
           p.functional = f;
           p.validate();
           return p;
         }),
         py::arg("kappa"), py::arg("omega_sq"), py::arg("functional") = Functional::Zakharov)
    .def_readonly("kappa", &ModelParams::kappa)
    .def_readonly("omega_sq", &ModelParams::omega_sq)
    .def_readonly("functional", &ModelParams::functional);

  py::class_<SolverConfig>(m, "SolverConfig")
    .def(py::init<>())
    .def_readwrite("tol", &SolverConfig::tol)
    .def_readwrite("max_iterations", &SolverConfig::max_iterations)
    .def_readwrite("path_nodes", &SolverConfig::path_nodes)
    .def_readwrite("morse_m", &SolverConfig::morse_m)
    .def_readwrite("random_seeds", &SolverConfig::random_seeds)
    .def_readwrite("seed", &SolverConfig::seed);

  py::class_<OperatorSet>(m, "OperatorSet")
    .def(py::init<const DomainSpec&>())
    .def_property_readonly("spec", &OperatorSet::spec)
    .def_property_readonly("size", &OperatorSet::size)
    .def("nodes", [](const OperatorSet& ops, int axis) {
      Vector x(ops.size());
      const Field z = Field::zeros(ops.spec());
      for (int i = 0; i < ops.size(); ++i) {
        x[i] = z.coordinate(i, axis);
      }
      return x;
    }, py::arg("axis") = 0)
    .def("x_norm", &OperatorSet::x_norm)
    .def("grad_l2_sq", &OperatorSet::grad_l2_sq);

  py::class_<Spectrum>(m, "Spectrum")
    .def_property_readonly("eigenvalues", [](const Spectrum& s) {
      std::vector<double> out;
      for (const auto& p : s.pairs) {
        out.push_back(p.lambda);
      }
      return out;
    })
    .def("phi", [](const Spectrum& s, int k) { return s.phi(k).values; }, py::arg("k"));

  m.def("solve_spectrum", [](const OperatorSet& ops, int k_max) { return solve_spectrum(ops, k_max); },
        py::arg("ops"), py::arg("k_max"));

  m.def("energy", [](const Vector& u, const ModelParams& p, const OperatorSet& ops) {
    return energy(field(ops, u), p, ops);
  });
  m.def("gradient", [](const Vector& u, const ModelParams& p, const OperatorSet& ops) {
    return gradient(field(ops, u), p, ops).values;
  });
  m.def("hess_vec", [](const Vector& u, const Vector& v, const ModelParams& p, const OperatorSet& ops) {
    return hess_vec(field(ops, u), field(ops, v), p, ops).values;
  });
  m.def("nehari_residual", [](const Vector& u, const ModelParams& p, const OperatorSet& ops) {
    return nehari_residual(field(ops, u), p, ops);
  });
  m.def("energy_identity_gap", [](const Vector& u, const ModelParams& p, const OperatorSet& ops) {
    return energy_identity_gap(field(ops, u), p, ops);
  });
  m.def("fibering_project", [](const Vector& u, const ModelParams& p, const OperatorSet& ops) {
    return fibering_project(field(ops, u), p, ops).t_root;
  }, "Nehari scaling t with t*u on the Nehari set, or None");

  m.def("mountain_pass", [](const ModelParams& p, const OperatorSet& ops, const Spectrum& s, const SolverConfig& cfg) {
    SolveReport r;
    {
      py::gil_scoped_release nogil;
      r = mountain_pass_solve(p, ops, s, cfg);
    }
    return report_dict(r);
  }, py::arg("params"), py::arg("ops"), py::arg("spectrum"), py::arg("config") = SolverConfig{});
  m.def("nehari_descent", [](const ModelParams& p, const OperatorSet& ops, const Vector& u0, const SolverConfig& cfg) {
    return report_dict(nehari_descent(p, ops, field(ops, u0), cfg));
  }, py::arg("params"), py::arg("ops"), py::arg("u0"), py::arg("config") = SolverConfig{});
  m.def("multiplicity_search", [](const ModelParams& p, const OperatorSet& ops, const Spectrum& s, int k,
                                  const SolverConfig& cfg) {
    py::list out;
    for (const SolveReport& r : multiplicity_search(p, ops, s, k, cfg)) {
      out.append(report_dict(r));
    }
    return out;
  }, py::arg("params"), py::arg("ops"), py::arg("spectrum"), py::arg("k"), py::arg("config") = SolverConfig{});
  m.def("global_minimize_e2", [](const ModelParams& p, const OperatorSet& ops, const Spectrum& s,
                                 const SolverConfig& cfg) {
    const E2Report r = global_minimize_e2(p, ops, s, cfg);
    py::dict d = report_dict(r.best);
    d["certified_negative"] = r.negativity.certified;
    d["min_ratio"] = r.negativity.min_ratio;
    return d;
  }, py::arg("params"), py::arg("ops"), py::arg("spectrum"), py::arg("config") = SolverConfig{});
  m.def("nonexistence_certificate", [](const ModelParams& p, const OperatorSet& ops, const Spectrum& s, int trials,
                                       const SolverConfig& cfg) {
    const NonexistenceCertificate c = nonexistence_certificate(p, ops, s, trials, cfg);
    py::dict d;
    d["verdict"] = to_string(c.verdict);
    d["threshold_check"] = c.threshold_check;
    d["shift"] = c.shift;
    d["lambda1"] = c.lambda1;
    d["trials"] = c.trials;
    d["descent_collapse_count"] = c.descent_collapse_count;
    d["projection_absent_count"] = c.projection_absent_count;
    return d;
  }, py::arg("params"), py::arg("ops"), py::arg("spectrum"), py::arg("trials") = 50,
     py::arg("config") = SolverConfig{});
  m.def("morse_index", [](const Vector& u, const ModelParams& p, const OperatorSet& ops, int m_) {
    return morse_index(field(ops, u), p, ops, m_);
  }, py::arg("u"), py::arg("params"), py::arg("ops"), py::arg("m") = 6);

  m.def("run", [](const std::string& config_json) {
    const RunOutcome r = run_safely(parse_config(Json::parse(config_json)));
    return py::make_tuple(r.exit_code, r.record.dump());
  }, py::arg("config_json"), "Runs a task from a JSON config string; returns (exit_code, record_json)");
}
