#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "edvrp/bench.hpp"
#include "edvrp/dynamic.hpp"
#include "edvrp/error.hpp"
#include "edvrp/io.hpp"
#include "edvrp/protocol.hpp"
#include "edvrp/render.hpp"
#include "edvrp/scenario.hpp"

using namespace edvrp;
namespace fs = std::filesystem;

namespace {

fs::path data_dir() {
  const char* env = std::getenv("EDVRP_DATA_DIR");
  return env && *env ? fs::path(env) : fs::path(".");
}

// Inputs: as given if that exists, otherwise relative to the data directory.
fs::path input_path(const std::string& p) {
  const fs::path path(p);
  if (path.is_absolute() || fs::exists(path)) return path;
  const fs::path alt = data_dir() / path;
  return fs::exists(alt) ? alt : path;
}

fs::path output_path(const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : data_dir() / path;
}

Scenario load_scenario_file(const std::string& p) { return read_scenario(read_text_file(input_path(p))); }

GeneratedScenario load_generated(const std::string& p) {
  const fs::path path = input_path(p);
  const Scenario s = read_scenario(read_text_file(path));
  GeneratedScenario g;
  g.id = s.id;
  g.layout = read_layout(read_text_file(layout_path_for(path)));
  g.vehicles = s.vehicles;
  g.mode = s.graph.mode();
  return g;
}

Json objectives_json(const ObjectiveVector& o) { return objectives_to_json(o); }

struct SolveArgs {
  std::string algo = "ra";
  std::string objective = "s";
  std::uint64_t seed = 0;
  int population = GAConfig{}.population_size;
  int generations = 0;
  double time_budget = GAConfig{}.time_budget_s;
  std::string policy;
  std::string fuel = "rate_time";

  void add(CLI::App* app, bool with_algo = true) {
    if (with_algo) {
      app->add_option("--algo", algo, "Solver: ra, oga, exact, greedy or policy")
          ->check(CLI::IsMember({"ra", "oga", "exact", "greedy", "policy"}));
    }
    app->add_option("--objective", objective, "Objective: s (distance), t (time) or c (fuel)")
        ->check(CLI::IsMember({"s", "t", "c", "distance", "time", "fuel"}));
    app->add_option("--seed", seed, "Solver seed");
    app->add_option("--population", population, "OGA population size");
    app->add_option("--generations", generations, "OGA generation limit (0 = none)");
    app->add_option("--time-budget", time_budget, "OGA time budget in seconds (0 = none)");
    app->add_option("--policy", policy, "host:port of a served policy (algo policy)");
    app->add_option("--fuel-convention", fuel, "rate_time or distance_over_rate");
  }

  SolverSpec spec(const std::string& a) const {
    Json j = {{"algo", a}, {"population", population}, {"generations", generations},
              {"time_budget_s", time_budget}, {"fuel_convention", fuel}};
    if (!policy.empty()) j["endpoint"] = policy;
    return solver_spec_from_json(j);
  }
};

int cmd_gen(int plots, int vehicles, std::uint64_t seed, int count, const std::string& out_dir,
            const std::string& mode) {
  const fs::path dir = out_dir.empty() ? data_dir() : output_path(out_dir);
  fs::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    ScenarioSpec spec;
    spec.num_plots = plots;
    spec.num_vehicles = vehicles;
    spec.seed = seed + static_cast<std::uint64_t>(i);
    spec.mode = parse_terminal_mode(mode);
    const auto gen = generate_scenario(spec);
    const fs::path path = dir / (gen.id + ".json");
    write_text_file(path, write_scenario(to_scenario(gen)));
    write_text_file(layout_path_for(path), write_layout(gen.layout));
    std::cout << path.string() << '\n';
  }
  return 0;
}

int cmd_solve(const SolveArgs& args, const std::string& scenario_path, const std::string& out) {
  const Scenario s = load_scenario_file(scenario_path);
  const Objective obj = parse_objective(args.objective);
  const auto result = solve_scenario(s, args.spec(args.algo), obj, args.seed);
  if (!out.empty()) {
    write_text_file(output_path(out), write_plan_file({s.id, args.algo, objective_letter(obj), result.plan}));
  }
  Json j = objectives_json(result.objectives);
  j["runtime_s"] = result.runtime_s;
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_eval(const std::string& scenario_path, const std::string& plan_path, const std::string& fuel) {
  const Scenario s = load_scenario_file(scenario_path);
  const PlanFile p = read_plan_file(read_text_file(input_path(plan_path)));
  require_valid_plan(s.graph, p.plan);
  std::cout << objectives_json(evaluate_plan(s.graph, s.vehicles, p.plan, parse_fuel_convention(fuel))).dump()
            << '\n';
  return 0;
}

std::shared_ptr<Server> g_server;

int cmd_serve(const std::string& listen, int max_sessions) {
  ServiceOptions options;
  options.max_sessions = max_sessions;
  options.data_dir = data_dir().string();
  auto service = std::make_shared<EnvService>(options);
  if (listen == "stdio" || listen == "-") {
    serve_stream(*service, std::cin, std::cout);
    return 0;
  }
  g_server = std::make_shared<Server>(service, listen);
  const int port = g_server->start();
  std::cerr << "listening on " << parse_endpoint(listen).first << ':' << port << std::endl;
  std::signal(SIGINT, [](int) { g_server->stop(); });
  std::signal(SIGTERM, [](int) { g_server->stop(); });
  g_server->wait();
  return 0;
}

PlanSolver plan_solver(const SolveArgs& args, const std::string& algo) {
  if (algo == "continue") {
    return [](const PlanRequest& r) {
      if (!r.phase1_plan) throw Error(ErrorCode::InvalidSpec, "continue only applies to phase 2");
      return continue_phase1(r.phase1->graph, *r.phase1_plan, *r.snapshot, *r.rearrangement);
    };
  }
  const SolverSpec spec = args.spec(algo);
  const std::uint64_t seed = args.seed;
  return [spec, seed](const PlanRequest& r) { return solve_scenario(r.scenario, spec, r.objective, seed).plan; };
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

int cmd_dynamic(const SolveArgs& args, const std::string& task, double fraction, const std::string& solver,
                const std::string& phase1_solver, const std::string& scenario_path, const std::string& out,
                const std::string& removed, const std::string& initial, bool abort_line,
                const std::string& svg) {
  const auto gen = load_generated(scenario_path);
  DynamicConfig config;
  config.task = parse_dynamic_task(task);
  config.fraction = fraction;
  config.objective = parse_objective(args.objective);
  config.removed = parse_ints(removed);
  config.initial_plots = parse_ints(initial);
  config.finish_line = !abort_line;
  config.fuel_convention = parse_fuel_convention(args.fuel);
  const auto p1 = plan_solver(args, phase1_solver.empty() ? (solver == "continue" ? "greedy" : solver) : phase1_solver);
  const auto o = run_dynamic(gen, config, p1, plan_solver(args, solver));

  std::ostringstream csv;
  csv << "scenario_id,task,fraction,solver,objective,stage,vehicle,distance_m,time_s,fuel_L,worked_m\n";
  auto row = [&](const std::string& stage, const std::string& vehicle, double d, double t, double c, double w) {
    csv << o.scenario_id << ',' << dynamic_task_name(config.task) << ',' << fraction << ',' << solver << ','
        << objective_letter(config.objective) << ',' << stage << ',' << vehicle << ',';
    Json cells = Json::array({d, t, c, w});
    csv << cells[0].dump() << ',' << cells[1].dump() << ',' << cells[2].dump() << ',' << cells[3].dump() << '\n';
  };
  for (std::size_t k = 0; k < o.snapshot.vehicles.size(); ++k) {
    const auto& v = o.snapshot.vehicles[k];
    row("phase1", std::to_string(k), v.transfer_m, v.time_s, v.fuel_L, v.work_m);
  }
  for (const auto& r : o.rearrangement.returns) {
    row("return", std::to_string(r.vehicle), r.transfer_m, r.time_s, r.fuel_L, r.work_m);
  }
  for (std::size_t k = 0; k < o.phase2_objectives.per_vehicle.size(); ++k) {
    const auto& v = o.phase2_objectives.per_vehicle[k];
    row("phase2", std::to_string(o.rearrangement.vehicle_map[k]), v.transfer_m, v.time_s, v.fuel_L, v.work_m);
  }
  for (std::size_t k = 0; k < o.totals.per_vehicle.size(); ++k) {
    const auto& v = o.totals.per_vehicle[k];
    row("total", std::to_string(k), v.transfer_m, v.time_s, v.fuel_L, v.work_m);
  }
  row("total", "all", o.totals.distance_m, o.totals.time_s, o.totals.fuel_L, o.totals.worked_m);
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    write_text_file(output_path(out), csv.str());
  }
  if (!svg.empty()) write_text_file(output_path(svg), render_dynamic(gen.layout, o));
  return 0;
}

int cmd_render(const std::string& scenario_path, const std::string& plan_path, double snapshot,
               const std::string& out) {
  const auto gen = load_generated(scenario_path);
  FieldDrawing d;
  d.title = gen.id;
  if (!plan_path.empty()) {
    const Scenario s = load_scenario_file(scenario_path);
    const PlanFile p = read_plan_file(read_text_file(input_path(plan_path)));
    const auto paths = plan_trajectories(gen.layout, s.graph, p.plan);
    if (snapshot > 0.0) {
      const auto snap = take_snapshot(gen.layout, s.graph, s.vehicles, p.plan, snapshot);
      for (std::size_t k = 0; k < paths.size(); ++k) {
        const auto& v = snap.vehicles[k];
        const auto done = truncate_polyline(paths[k], v.transfer_m + v.work_m);
        d.phase1.push_back(done);
        if (!done.empty()) d.phase2_starts.push_back(done.back());
      }
    }
    d.routes = paths;
  }
  write_text_file(output_path(out), render_field(gen.layout, d));
  return 0;
}

int cmd_chart(const std::string& csv_path, const std::vector<std::string>& columns, const std::string& title,
              const std::string& out) {
  std::ifstream in(input_path(csv_path));
  if (!in) throw Error(ErrorCode::Io, "cannot read " + csv_path);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<ChartSeries> series;
  std::vector<std::size_t> index;
  for (const auto& c : columns) {
    const auto it = std::find(header.begin(), header.end(), c);
    if (it == header.end()) throw Error(ErrorCode::Parse, "column '" + c + "' not in " + csv_path);
    index.push_back(static_cast<std::size_t>(it - header.begin()));
    series.push_back({c, {}});
  }
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    for (std::size_t i = 0; i < index.size(); ++i) {
      double v = std::nan("");
      if (index[i] < cells.size()) {
        try {
          v = std::stod(cells[index[i]]);
        } catch (const std::exception&) {
        }
      }
      series[i].values.push_back(v);
    }
  }
  write_text_file(output_path(out), render_line_chart(title, "row", series));
  return 0;
}

int cmd_bench(const std::string& manifest, const std::string& out, const std::string& summary, int jobs,
              bool deterministic) {
  const auto m = read_manifest(input_path(manifest));
  std::ofstream csv;
  BenchOptions options;
  options.jobs = jobs;
  options.deterministic = deterministic;
  if (!out.empty()) {
    const fs::path path = output_path(out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    csv.open(path);
    if (!csv) throw Error(ErrorCode::Io, "cannot write " + path.string());
    options.csv = &csv;
  } else {
    options.csv = &std::cout;
  }
  const auto result = run_benchmark(m, options);
  const std::string table = format_summary(summarize(result.rows));
  if (!summary.empty()) write_text_file(output_path(summary), table);
  std::cerr << table;
  for (const auto& f : result.failures) {
    std::cerr << "failed: " << f.scenario << ' ' << f.algo << ' ' << f.objective << " seed " << f.seed << ": "
              << f.message << '\n';
  }
  return result.complete() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-vehicle path planning for field operations.\n"
               "Relative input paths fall back to $EDVRP_DATA_DIR; relative outputs are written there."};
  app.require_subcommand(1);

  int plots = 2;
  int vehicles = 2;
  std::uint64_t gen_seed = 0;
  int count = 1;
  std::string out_dir;
  std::string mode = "per-vehicle-terminals";
  auto* gen = app.add_subcommand("gen", "Generate scenario files and layout sidecars");
  gen->add_option("--plots", plots, "Number of plots")->check(CLI::PositiveNumber);
  gen->add_option("--vehicles", vehicles, "Number of vehicles")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Seed of the first scenario (later ones use seed+i)");
  gen->add_option("--count", count, "Number of scenarios")->check(CLI::PositiveNumber);
  gen->add_option("--out-dir", out_dir, "Output directory (default $EDVRP_DATA_DIR or .)");
  gen->add_option("--mode", mode, "single-depot or per-vehicle-terminals");

  SolveArgs solve_args;
  std::string scenario;
  std::string out;
  auto* solve = app.add_subcommand("solve", "Plan one scenario and write a plan file");
  solve_args.add(solve);
  solve->add_option("--scenario", scenario, "Scenario file")->required();
  solve->add_option("--out", out, "Plan file to write");

  std::string plan;
  auto* eval = app.add_subcommand("eval", "Evaluate a plan file against a scenario");
  eval->add_option("--scenario", scenario, "Scenario file")->required();
  eval->add_option("--plan", plan, "Plan file")->required();
  eval->add_option("--fuel-convention", solve_args.fuel, "rate_time or distance_over_rate");

  std::string listen = "127.0.0.1:7878";
  int max_sessions = 64;
  auto* serve = app.add_subcommand("serve-env", "Serve the environment protocol over TCP or stdio");
  serve->add_option("--listen", listen, "host:port to listen on, or 'stdio'");
  serve->add_option("--max-sessions", max_sessions, "Maximum concurrent sessions")->check(CLI::PositiveNumber);

  std::string task = "field-increase";
  double fraction = 0.5;
  std::string dyn_solver = "greedy";
  std::string phase1_solver;
  std::string removed;
  std::string initial;
  bool abort_line = false;
  std::string svg;
  SolveArgs dyn_args;
  auto* dynamic = app.add_subcommand("dynamic", "Run a dynamic re-planning task and write metrics");
  dynamic->add_option("--task", task, "field-increase or vehicle-decrease")
      ->check(CLI::IsMember({"field-increase", "vehicle-decrease"}));
  dynamic->add_option("--fraction", fraction, "Snapshot time as a fraction of the phase-1 makespan")
      ->check(CLI::Range(0.0, 1.0));
  dynamic->add_option("--solver", dyn_solver, "Phase-2 solver: ra, oga, exact, greedy, policy or continue");
  dynamic->add_option("--phase1-solver", phase1_solver, "Phase-1 solver (default: same as --solver)");
  dyn_args.add(dynamic, false);
  dynamic->add_option("--scenario", scenario, "Scenario file with a layout sidecar")->required();
  dynamic->add_option("--out", out, "Metrics CSV (default stdout)");
  dynamic->add_option("--removed", removed, "Vehicle decrease: comma-separated vehicle ids (default last)");
  dynamic->add_option("--initial-plots", initial, "Field increase: plots known at the start (default first half)");
  dynamic->add_flag("--abort-line", abort_line, "Removed vehicles leave their current line unfinished");
  dynamic->add_option("--svg", svg, "Also render the outcome to this SVG file");

  double snapshot = 0.0;
  auto* render = app.add_subcommand("render", "Render a field layout and plan as SVG");
  render->add_option("--scenario", scenario, "Scenario file with a layout sidecar")->required();
  render->add_option("--plan", plan, "Plan file to draw");
  render->add_option("--snapshot", snapshot, "Gray out the part driven before this fraction of the makespan")
      ->check(CLI::Range(0.0, 1.0));
  render->add_option("--out", out, "SVG file")->required();

  std::string csv_in;
  std::vector<std::string> columns;
  std::string title;
  auto* chart = app.add_subcommand("chart", "Plot CSV columns as an SVG line chart");
  chart->add_option("--csv", csv_in, "CSV file with a header row")->required();
  chart->add_option("--columns", columns, "Columns to plot")->required();
  chart->add_option("--title", title, "Chart title");
  chart->add_option("--out", out, "SVG file")->required();

  std::string manifest;
  std::string summary;
  int jobs = 1;
  bool deterministic = false;
  auto* bench = app.add_subcommand("bench", "Run a benchmark manifest");
  bench->add_option("--manifest", manifest, "Manifest file")->required();
  bench->add_option("--out", out, "Metrics CSV (default stdout)");
  bench->add_option("--summary", summary, "Write the summary table here as well");
  bench->add_option("--jobs", jobs, "Scenarios run in parallel")->check(CLI::PositiveNumber);
  bench->add_flag("--deterministic", deterministic, "Report runtimes as 0 so output is byte-reproducible");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(plots, vehicles, gen_seed, count, out_dir, mode);
    if (*solve) return cmd_solve(solve_args, scenario, out);
    if (*eval) return cmd_eval(scenario, plan, solve_args.fuel);
    if (*serve) return cmd_serve(listen, max_sessions);
    if (*dynamic) {
      return cmd_dynamic(dyn_args, task, fraction, dyn_solver, phase1_solver, scenario, out, removed, initial,
                         abort_line, svg);
    }
    if (*render) return cmd_render(scenario, plan, snapshot, out);
    if (*chart) return cmd_chart(csv_in, columns, title, out);
    if (*bench) return cmd_bench(manifest, out, summary, jobs, deterministic);
  } catch (const Error& e) {
    std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
