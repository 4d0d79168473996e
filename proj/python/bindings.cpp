#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "swarm_opt/cli.hpp"
#include "swarm_opt/paper_scenarios.hpp"

namespace py = pybind11;
using namespace swarm;

namespace {

py::array_t<double> per_agent_vec(const Trajectory& t, long rows, Eigen::Map<const Vec> (Trajectory::*get)(long, int) const) {
  py::array_t<double> out({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(t.n()), static_cast<py::ssize_t>(t.m())});
  auto a = out.mutable_unchecked<3>();
  for (long k = 0; k < rows; ++k)
    for (int i = 0; i < t.n(); ++i) {
      const auto x = (t.*get)(k, i);
      for (int c = 0; c < t.m(); ++c) a(k, i, c) = x[c];
    }
  return out;
}

py::array_t<double> per_agent(const Trajectory& t, long rows, double (Trajectory::*get)(long, int) const) {
  py::array_t<double> out({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(t.n())});
  auto a = out.mutable_unchecked<2>();
  for (long k = 0; k < rows; ++k)
    for (int i = 0; i < t.n(); ++i) a(k, i) = (t.*get)(k, i);
  return out;
}

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

Scenario paper(const std::string& which) {
  if (which == "A") return scenario_paper_A();
  if (which == "B") return scenario_paper_B();
  throw py::value_error("expected \"A\" or \"B\"");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Distributed optimization of double-integrator swarms with nonconvex velocity sets";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<AssumptionViolation>(m, "AssumptionViolation", PyExc_RuntimeError);

  py::enum_<Algorithm>(m, "Algorithm").value("A", Algorithm::A).value("B", Algorithm::B);
  py::enum_<ThetaBranch>(m, "ThetaBranch")
      .value("RuleA", ThetaBranch::RuleA)
      .value("RuleB", ThetaBranch::RuleB)
      .value("Gradient", ThetaBranch::Gradient);

  py::class_<ConvexRegion>(m, "ConvexRegion")
      .def_static("ball", &ConvexRegion::ball, py::arg("center"), py::arg("radius"))
      .def_static("box", &ConvexRegion::box, py::arg("lower"), py::arg("upper"))
      .def_static("halfspaces", &ConvexRegion::halfspaces, py::arg("normals"), py::arg("offsets"), py::arg("witness"))
      .def_static("whole_space", &ConvexRegion::whole_space, py::arg("dim"))
      .def_property_readonly("dim", &ConvexRegion::dim)
      .def("is_bounded", &ConvexRegion::is_bounded)
      .def("contains", &ConvexRegion::contains, py::arg("x"), py::arg("tol") = kTolMembership)
      .def("__eq__", &ConvexRegion::operator==);

  py::class_<VelocitySet>(m, "VelocitySet")
      .def(py::init<std::vector<ConvexRegion>, std::optional<double>>(), py::arg("pieces"),
           py::arg("bounding_radius") = std::nullopt)
      .def_property_readonly("pieces", &VelocitySet::pieces)
      .def_property_readonly("bounding_radius", &VelocitySet::bounding_radius)
      .def("contains", &VelocitySet::contains);

  m.def("project", [](const ConvexRegion& r, const Vec& x) { return project(r, x); }, py::arg("region"), py::arg("x"));
  m.def("membership", &membership, py::arg("set"), py::arg("x"));
  m.def("max_segment_beta", [](const VelocitySet& s, const Vec& d) { return max_segment_beta(s, d); },
        py::arg("set"), py::arg("direction"));
  m.def("max_segment_beta_bisect", [](const VelocitySet& s, const Vec& d) { return max_segment_beta_bisect(s, d); },
        py::arg("set"), py::arg("direction"));
  m.def("shrink", [](const VelocitySet& s, const Vec& x) {
        const Shrunk r = shrink(s, x);
        return py::make_tuple(r.value, r.scale);
      }, py::arg("set"), py::arg("x"), "Returns (value, scale).");
  m.def("certify_velocity_set", [](const VelocitySet& s, int n_dirs) {
        const CertReport c = certify_velocity_set(s, n_dirs);
        py::dict d;
        d["rho_upper"] = c.rho_upper;
        d["rho_lower"] = c.rho_lower;
        d["n_dirs"] = c.n_dirs;
        d["valid"] = c.valid;
        d["sampled"] = c.sampled;
        return d;
      }, py::arg("set"), py::arg("n_dirs") = 64);

  py::class_<Objective>(m, "Objective")
      .def_static("quadratic", &Objective::quadratic, py::arg("center"), py::arg("weights"))
      .def_static("quartic", &Objective::quartic, py::arg("center"), py::arg("weights"))
      .def_static("sum", &Objective::sum, py::arg("members"))
      .def_property_readonly("dim", &Objective::dim)
      .def("eval", &Objective::eval)
      .def("gradient", &Objective::gradient)
      .def("__call__", &Objective::eval);
  m.def("finite_diff_gradient", &finite_diff_gradient, py::arg("f"), py::arg("x"), py::arg("h") = 1e-6);
  m.def("minimize_team", [](const std::vector<Objective>& members, const std::vector<ConvexRegion>& regions) {
        return minimize_team(TeamObjective(members), regions);
      }, py::arg("members"), py::arg("regions") = std::vector<ConvexRegion>{});
  m.def("paper_objectives", &paper_objectives);
  m.def("paper_velocity_set", &paper_velocity_set);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("n", &Scenario::n)
      .def_readonly("m", &Scenario::m)
      .def_readonly("T", &Scenario::T)
      .def_readwrite("horizon", &Scenario::horizon)
      .def_readonly("algorithm", &Scenario::algorithm)
      .def("initial_r", [](const Scenario& s) {
        Mat r(s.n, s.m);
        for (int i = 0; i < s.n; ++i) r.row(i) = s.agents[i].initial.r.transpose();
        return r;
      })
      .def("set_initial_y", [](Scenario& s, double y) {
        for (auto& a : s.agents) a.initial.y = y;
      })
      .def("optimum", &scenario_optimum)
      .def("eta_steps", [](const Scenario& s) { return validate_schedule(s.schedule).eta_steps; })
      .def("validate", [](const Scenario& s) { validate_scenario(s); });

  m.def("paper_scenario", &paper, py::arg("which"));
  m.def("load_scenario", [](const std::filesystem::path& p) { return load_scenario(p); }, py::arg("path"));
  m.def("parse_scenario", [](const std::string& text) {
        ScenarioFile f = parse_scenario_file(text);
        validate_scenario(f.scenario);
        return f.scenario;
      }, py::arg("text"));
  m.def("dump_scenario", [](const Scenario& s) {
        ScenarioFile f;
        f.scenario = s;
        return dump_scenario_file(f);
      }, py::arg("scenario"));

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("steps", &Trajectory::steps)
      .def_property_readonly("n", &Trajectory::n)
      .def_property_readonly("m", &Trajectory::m)
      .def_property_readonly("algorithm", &Trajectory::algorithm)
      .def_property_readonly("r", [](const Trajectory& t) { return per_agent_vec(t, t.steps() + 1, &Trajectory::r); })
      .def_property_readonly("v", [](const Trajectory& t) { return per_agent_vec(t, t.steps() + 1, &Trajectory::v); })
      .def_property_readonly("y", [](const Trajectory& t) { return per_agent(t, t.steps() + 1, &Trajectory::y); })
      .def_property_readonly("p", [](const Trajectory& t) { return per_agent(t, t.steps() + 1, &Trajectory::p); })
      .def_property_readonly("sigma", [](const Trajectory& t) { return per_agent(t, t.steps(), &Trajectory::sigma); })
      .def_property_readonly("b", [](const Trajectory& t) { return per_agent(t, t.steps(), &Trajectory::b); })
      .def_property_readonly("theta", [](const Trajectory& t) { return per_agent_vec(t, t.steps(), &Trajectory::theta); })
      .def("theta_branch", &Trajectory::theta_branch, py::arg("k"), py::arg("agent"))
      .def("set_theta", &Trajectory::set_theta);

  m.def("run", [](const Scenario& s, std::optional<long> horizon) {
        py::gil_scoped_release release;
        return run(s, horizon);
      }, py::arg("scenario"), py::arg("horizon") = std::nullopt);

  m.def("replay_check", [](const Trajectory& t, const Scenario& s) {
        const ReplayReport r = replay_check(t, s.schedule, s.T);
        py::dict d;
        d["max_residual"] = r.max_residual;
        d["worst_step"] = r.worst_step;
        d["first_step_over_tol"] = r.first_step_over_tol;
        return d;
      }, py::arg("trajectory"), py::arg("scenario"));
  m.def("psi", [](const Trajectory& t, const Scenario& s, long k) { return psi_at(t, s.schedule, s.T, k); },
        py::arg("trajectory"), py::arg("scenario"), py::arg("k"));
  m.def("stochasticity", [](const Trajectory& t, const Scenario& s) {
        const StochasticityReport r = stochasticity(t, s.schedule, s.T);
        py::dict d;
        d["row_sum_err"] = to_array(r.row_sum_err);
        d["min_entry"] = to_array(r.min_entry);
        d["max_row_sum_err"] = r.max_row_sum_err;
        d["min_entry_overall"] = r.min_entry_overall;
        d["nonzero_floor"] = r.nonzero_floor;
        d["min_sigma"] = r.min_sigma;
        return d;
      }, py::arg("trajectory"), py::arg("scenario"));
  m.def("metrics", [](const Trajectory& t, const Scenario& s) {
        const MetricsSeries ms = compute_metrics(t, team_of(s), scenario_optimum(s));
        py::dict d;
        d["consensus_spread"] = to_array(ms.consensus_spread);
        d["optimality_gap"] = to_array(ms.optimality_gap);
        d["y_ratio_spread"] = to_array(ms.y_ratio_spread);
        d["state_envelope"] = to_array(ms.state_envelope);
        return d;
      }, py::arg("trajectory"), py::arg("scenario"));
  m.def("invariants", [](const Trajectory& t, const Scenario& s) {
        py::list out;
        for (const auto& c : trajectory_invariants(t, s))
          out.append(py::make_tuple(c.name, c.passed, c.first_step, c.detail));
        return out;
      }, py::arg("trajectory"), py::arg("scenario"));

  m.def("cli_main", [](std::vector<std::string> args) {
        args.insert(args.begin(), "swarm-opt");
        return cli_main(args);
      }, py::arg("args"), "Runs the swarm-opt command line with the given arguments; returns the exit code.");
}
