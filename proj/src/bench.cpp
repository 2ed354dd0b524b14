#include "edvrp/bench.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "edvrp/env.hpp"
#include "edvrp/error.hpp"
#include "edvrp/protocol.hpp"
#include "edvrp/scenario.hpp"

namespace edvrp {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Scenario load_source(const ScenarioSource& src) {
  if (!src.generated) return read_scenario(read_text_file(src.path));
  ScenarioSpec spec;
  spec.num_plots = src.plots;
  spec.num_vehicles = src.vehicles;
  spec.seed = src.seed;
  spec.mode = src.mode;
  return to_scenario(generate_scenario(spec));
}

std::string source_label(const ScenarioSource& src) {
  if (!src.generated) return src.path.string();
  return "generated(" + std::to_string(src.plots) + "," + std::to_string(src.vehicles) + "," +
         std::to_string(src.seed) + ")";
}

}  // namespace

SolverSpec solver_spec_from_json(const Json& j) {
  SolverSpec s;
  if (j.is_string()) {
    s.algo = j.get<std::string>();
  } else {
    s.algo = j.at("algo").get<std::string>();
    s.ga.population_size = j.value("population", s.ga.population_size);
    s.ga.generations = j.value("generations", s.ga.generations);
    s.ga.time_budget_s = j.value("time_budget_s", s.ga.time_budget_s);
    s.endpoint = j.value("endpoint", s.endpoint);
    if (auto f = j.find("fuel_convention"); f != j.end()) {
      s.fuel_convention = parse_fuel_convention(f->get<std::string>());
    }
  }
  if (s.algo != "ra" && s.algo != "oga" && s.algo != "exact" && s.algo != "greedy" && s.algo != "policy") {
    throw Error(ErrorCode::InvalidSpec, "unknown algorithm '" + s.algo + "'");
  }
  if (s.algo == "policy" && s.endpoint.empty()) {
    throw Error(ErrorCode::InvalidSpec, "the policy solver needs an endpoint");
  }
  s.ga.fuel_convention = s.fuel_convention;
  return s;
}

SolveOutcome solve_scenario(const Scenario& scenario, const SolverSpec& solver, Objective objective,
                            std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  SolveOutcome out;
  if (solver.algo == "ra") {
    out.plan = solve_random(scenario.graph, scenario.vehicles, seed);
  } else if (solver.algo == "oga") {
    GAConfig config = solver.ga;
    config.seed = seed;
    out.plan = solve_oga(scenario.graph, scenario.vehicles, objective, config).plan;
  } else if (solver.algo == "exact") {
    out.plan = solve_exact(scenario.graph, scenario.vehicles, objective, solver.fuel_convention).plan;
  } else if (solver.algo == "greedy") {
    out.plan = solve_greedy(scenario.graph, scenario.vehicles, objective);
  } else if (solver.algo == "policy") {
    auto client = std::make_shared<LineClient>(solver.endpoint);
    auto shared = std::make_shared<const Scenario>(scenario);
    out.plan = rollout(shared, remote_policy(client)).plan;
  } else {
    throw Error(ErrorCode::InvalidSpec, "unknown algorithm '" + solver.algo + "'");
  }
  out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.objectives = evaluate_plan(scenario.graph, scenario.vehicles, out.plan, solver.fuel_convention);
  return out;
}

Manifest manifest_from_json(const Json& j, const std::filesystem::path& base_dir) {
  try {
    const int version = j.at("version").get<int>();
    if (version != kManifestVersion) {
      throw Error(ErrorCode::Parse, "unsupported manifest version " + std::to_string(version));
    }
    Manifest m;
    for (const auto& s : j.at("scenarios")) {
      ScenarioSource src;
      if (s.is_string()) {
        src.path = s.get<std::string>();
      } else if (auto g = s.find("generate"); g != s.end()) {
        src.generated = true;
        src.plots = g->at("plots").get<int>();
        src.vehicles = g->at("vehicles").get<int>();
        src.seed = g->value("seed", std::uint64_t{0});
        if (auto mode = g->find("mode"); mode != g->end()) src.mode = parse_terminal_mode(mode->get<std::string>());
      } else {
        src.path = s.at("path").get<std::string>();
      }
      if (!src.generated && src.path.is_relative() && !base_dir.empty()) src.path = base_dir / src.path;
      m.scenarios.push_back(std::move(src));
    }
    for (const auto& s : j.at("solvers")) m.solvers.push_back(solver_spec_from_json(s));
    for (const auto& o : j.value("objectives", Json::array({"s", "t", "c"}))) {
      m.objectives.push_back(parse_objective(o.get<std::string>()));
    }
    for (const auto& s : j.value("seeds", Json::array({0}))) m.seeds.push_back(s.get<std::uint64_t>());
    if (m.scenarios.empty() || m.solvers.empty() || m.objectives.empty() || m.seeds.empty()) {
      throw Error(ErrorCode::Parse, "manifest needs at least one scenario, solver, objective and seed");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed manifest: ") + e.what());
  }
}

Manifest read_manifest(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  return manifest_from_json(j, path.parent_path());
}

std::string bench_csv_header() {
  return "scenario_id,algo,objective,seed,distance_m,time_s,fuel_L,runtime_s,total_distance_m";
}

std::string bench_csv_row(const BenchRow& r) {
  return csv_field(r.scenario_id) + "," + r.algo + "," + r.objective + "," + std::to_string(r.seed) + "," +
         shortest(r.distance_m) + "," + shortest(r.time_s) + "," + shortest(r.fuel_L) + "," +
         shortest(r.runtime_s) + "," + shortest(r.total_distance_m);
}

std::vector<SummaryRow> summarize(const std::vector<BenchRow>& rows) {
  std::vector<SummaryRow> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& r : rows) {
    auto [it, fresh] = index.try_emplace({r.algo, r.objective}, out.size());
    if (fresh) out.push_back({r.algo, r.objective});
    auto& s = out[it->second];
    ++s.count;
    s.distance_m += r.distance_m;
    s.time_s += r.time_s;
    s.fuel_L += r.fuel_L;
    s.runtime_s += r.runtime_s;
  }
  for (auto& s : out) {
    s.distance_m /= s.count;
    s.time_s /= s.count;
    s.fuel_L /= s.count;
    s.runtime_s /= s.count;
  }
  return out;
}

std::string format_summary(const std::vector<SummaryRow>& summary) {
  std::ostringstream o;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %-3s %6s %14s %12s %10s %10s\n", "algo", "obj", "n", "Distance(m)",
                "Time(s)", "Fuel(L)", "Runtime(s)");
  o << buf;
  for (const auto& s : summary) {
    std::snprintf(buf, sizeof buf, "%-8s %-3s %6d %14.2f %12.2f %10.3f %10.3f\n", s.algo.c_str(),
                  s.objective.c_str(), s.count, s.distance_m, s.time_s, s.fuel_L, s.runtime_s);
    o << buf;
  }
  return o.str();
}

BenchResult run_benchmark(const Manifest& manifest, const BenchOptions& options) {
  for (const auto& src : manifest.scenarios) {
    if (!src.generated && !std::filesystem::exists(src.path)) {
      throw Error(ErrorCode::Io, "scenario file not found: " + src.path.string());
    }
  }

  struct Slot {
    std::vector<BenchRow> rows;
    std::vector<BenchFailure> failures;
    bool done = false;
  };
  const std::size_t n = manifest.scenarios.size();
  std::vector<Slot> slots(n);
  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  std::size_t flushed = 0;

  if (options.csv) *options.csv << bench_csv_header() << '\n' << std::flush;

  auto flush_ready = [&] {
    while (flushed < n && slots[flushed].done) {
      if (options.csv) {
        for (const auto& r : slots[flushed].rows) *options.csv << bench_csv_row(r) << '\n';
        options.csv->flush();
      }
      ++flushed;
    }
  };

  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      Slot slot;
      const auto& src = manifest.scenarios[i];
      try {
        const Scenario scenario = load_source(src);
        for (const auto& solver : manifest.solvers) {
          for (Objective obj : manifest.objectives) {
            for (std::uint64_t seed : manifest.seeds) {
              try {
                const auto out = solve_scenario(scenario, solver, obj, seed);
                BenchRow row;
                row.scenario_id = scenario.id;
                row.algo = solver.algo;
                row.objective = objective_letter(obj);
                row.seed = seed;
                row.distance_m = out.objectives.total_transfer_distance_m;
                row.time_s = out.objectives.makespan_s;
                row.fuel_L = out.objectives.total_fuel_L;
                row.runtime_s = options.deterministic ? 0.0 : out.runtime_s;
                row.total_distance_m =
                    out.objectives.total_transfer_distance_m + out.objectives.total_working_distance_m;
                slot.rows.push_back(std::move(row));
              } catch (const std::exception& e) {
                slot.failures.push_back({scenario.id, solver.algo, objective_letter(obj), seed, e.what()});
              }
            }
          }
        }
      } catch (const std::exception& e) {
        slot.failures.push_back({source_label(src), "", "", 0, e.what()});
      }
      std::lock_guard lock(mutex);
      slots[i] = std::move(slot);
      slots[i].done = true;
      flush_ready();
    }
  };

  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(n)));
  std::vector<std::thread> threads;
  for (int t = 1; t < jobs; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();

  BenchResult result;
  for (auto& s : slots) {
    for (auto& r : s.rows) result.rows.push_back(std::move(r));
    for (auto& f : s.failures) result.failures.push_back(std::move(f));
  }
  return result;
}

}  // namespace edvrp
