#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "edvrp/bench.hpp"
#include "edvrp/dynamic.hpp"
#include "edvrp/env.hpp"
#include "edvrp/error.hpp"
#include "edvrp/io.hpp"
#include "edvrp/protocol.hpp"
#include "edvrp/render.hpp"
#include "edvrp/scenario.hpp"

namespace py = pybind11;
using namespace edvrp;

namespace {

py::object to_py(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null: return py::none();
    case Json::value_t::boolean: return py::bool_(j.get<bool>());
    case Json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case Json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case Json::value_t::number_float: return py::float_(j.get<double>());
    case Json::value_t::string: return py::str(j.get<std::string>());
    case Json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_py(v));
      return out;
    }
    case Json::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
      return out;
    }
    default: return py::none();
  }
}

// A scenario plus, for generated ones, its layout.
struct PyScenario {
  std::shared_ptr<const Scenario> scenario;
  std::shared_ptr<const GeneratedScenario> generated;
};

using PyPlan = std::vector<std::pair<int, int>>;

Plan to_plan(const PyPlan& p) {
  Plan plan;
  for (auto [n, e] : p) plan.actions.push_back({n, e});
  return plan;
}

PyPlan from_plan(const Plan& plan) {
  PyPlan out;
  for (const auto& a : plan.actions) out.emplace_back(a.node, a.entrance);
  return out;
}

PyScenario generate(int plots, int vehicles, std::uint64_t seed, const std::string& mode) {
  ScenarioSpec spec;
  spec.num_plots = plots;
  spec.num_vehicles = vehicles;
  spec.seed = seed;
  spec.mode = parse_terminal_mode(mode);
  auto gen = std::make_shared<GeneratedScenario>(generate_scenario(spec));
  return {std::make_shared<Scenario>(to_scenario(*gen)), gen};
}

const GeneratedScenario& need_layout(const PyScenario& s) {
  if (!s.generated) throw Error(ErrorCode::InvalidSpec, "scenario has no layout");
  return *s.generated;
}

}  // namespace

PYBIND11_MODULE(_edvrp, m) {
  m.doc() = "Multi-vehicle path planning for field operations";

  static py::exception<Error> error(m, "EdvrpError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(error_code_name(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::class_<PyScenario>(m, "Scenario")
      .def_static("from_json", [](const std::string& text) {
        return PyScenario{std::make_shared<Scenario>(read_scenario(text)), nullptr};
      })
      .def_static("load", [](const std::string& path, bool with_layout) {
        PyScenario s{std::make_shared<Scenario>(read_scenario(read_text_file(path))), nullptr};
        if (with_layout) {
          auto g = std::make_shared<GeneratedScenario>();
          g->id = s.scenario->id;
          g->layout = read_layout(read_text_file(layout_path_for(path)));
          g->vehicles = s.scenario->vehicles;
          g->mode = s.scenario->graph.mode();
          s.generated = g;
        }
        return s;
      }, py::arg("path"), py::arg("with_layout") = false)
      .def("to_json", [](const PyScenario& s) { return write_scenario(*s.scenario); })
      .def("layout_json", [](const PyScenario& s) { return write_layout(need_layout(s).layout); })
      .def_property_readonly("id", [](const PyScenario& s) { return s.scenario->id; })
      .def_property_readonly("num_lines", [](const PyScenario& s) { return s.scenario->graph.num_lines(); })
      .def_property_readonly("num_vehicles", [](const PyScenario& s) { return s.scenario->graph.num_vehicles(); })
      .def("graph", [](const PyScenario& s) { return to_py(graph_tensors(*s.scenario)); });

  m.def("generate", &generate, py::arg("plots"), py::arg("vehicles"), py::arg("seed") = 0,
        py::arg("mode") = "per-vehicle-terminals");

  m.def("validate", [](const PyScenario& s, const PyPlan& plan) {
    return validate_plan(s.scenario->graph, to_plan(plan)).valid();
  });

  m.def("evaluate", [](const PyScenario& s, const PyPlan& plan, const std::string& fuel) {
    const Plan p = to_plan(plan);
    require_valid_plan(s.scenario->graph, p);
    return to_py(objectives_to_json(evaluate_plan(s.scenario->graph, s.scenario->vehicles, p,
                                                  parse_fuel_convention(fuel))));
  }, py::arg("scenario"), py::arg("plan"), py::arg("fuel_convention") = "rate_time");

  m.def("solve", [](const PyScenario& s, const std::string& algo, const std::string& objective,
                    std::uint64_t seed, int population, int generations, double time_budget) {
    Json j = {{"algo", algo}, {"population", population}, {"generations", generations},
              {"time_budget_s", time_budget}};
    const SolverSpec spec = solver_spec_from_json(j);
    SolveOutcome out;
    {
      py::gil_scoped_release release;
      out = solve_scenario(*s.scenario, spec, parse_objective(objective), seed);
    }
    return py::make_tuple(from_plan(out.plan), to_py(objectives_to_json(out.objectives)), out.runtime_s);
  }, py::arg("scenario"), py::arg("algo") = "ra", py::arg("objective") = "s", py::arg("seed") = 0,
     py::arg("population") = 128, py::arg("generations") = 0, py::arg("time_budget") = 14.0);

  py::class_<Environment>(m, "Env")
      .def(py::init([](const PyScenario& s, const std::string& objective, bool distance_bonus) {
             RewardConfig c;
             c.objective = parse_objective(objective);
             c.distance_bonus = distance_bonus;
             return Environment(s.scenario, c);
           }),
           py::arg("scenario"), py::arg("objective") = "s", py::arg("distance_bonus") = false)
      .def("reset", [](Environment& e) {
        e.reset();
        return e.mask();
      })
      .def("step", [](Environment& e, int index) {
        const auto r = e.step_index(index);
        return py::make_tuple(py::make_tuple(r.rewards.distance_m, r.rewards.time_s, r.rewards.fuel_L),
                              r.combined, r.done);
      })
      .def("mask", &Environment::mask)
      .def_property_readonly("action_count", &Environment::action_count)
      .def_property_readonly("current_vehicle", [](const Environment& e) { return e.state().current_vehicle; })
      .def_property_readonly("done", [](const Environment& e) { return e.state().done; })
      .def("plan", [](const Environment& e) { return from_plan(e.state().plan); })
      .def("objectives", [](const Environment& e) { return to_py(objectives_to_json(e.objectives())); });

  py::class_<EnvService, std::shared_ptr<EnvService>>(m, "EnvService")
      .def(py::init([](int max_sessions, const std::string& data_dir) {
             return std::make_shared<EnvService>(ServiceOptions{max_sessions, data_dir});
           }),
           py::arg("max_sessions") = 64, py::arg("data_dir") = ".")
      .def("handle", [](EnvService& s, const std::string& line) {
        py::gil_scoped_release release;
        return s.handle(line);
      })
      .def_property_readonly("session_count", &EnvService::session_count);

  m.def("render_plan", [](const PyScenario& s, const PyPlan& plan) {
    return render_plan(need_layout(s).layout, s.scenario->graph, to_plan(plan), s.scenario->id);
  });
  m.def("render_field", [](const PyScenario& s) { return render_field(need_layout(s).layout); });

  m.def("dynamic", [](const PyScenario& s, const std::string& task, double fraction, const std::string& solver,
                      const std::string& objective, std::uint64_t seed) {
    DynamicConfig config;
    config.task = parse_dynamic_task(task);
    config.fraction = fraction;
    config.objective = parse_objective(objective);
    const SolverSpec spec = solver_spec_from_json(Json{{"algo", solver}});
    PlanSolver solve = [spec, seed](const PlanRequest& r) {
      return solve_scenario(r.scenario, spec, r.objective, seed).plan;
    };
    const auto o = run_dynamic(need_layout(s), config, solve, solve);
    py::dict totals;
    totals["distance_m"] = o.totals.distance_m;
    totals["time_s"] = o.totals.time_s;
    totals["fuel_L"] = o.totals.fuel_L;
    totals["worked_m"] = o.totals.worked_m;
    totals["line_total_m"] = o.line_total_m;
    totals["phase1"] = to_py(objectives_to_json(o.phase1_objectives));
    totals["phase2"] = to_py(objectives_to_json(o.phase2_objectives));
    return totals;
  }, py::arg("scenario"), py::arg("task") = "field-increase", py::arg("fraction") = 0.5,
     py::arg("solver") = "greedy", py::arg("objective") = "s", py::arg("seed") = 0);
}
