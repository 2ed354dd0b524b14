// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 if any fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <thread>

#include "edvrp/dynamic.hpp"
#include "edvrp/env.hpp"
#include "edvrp/error.hpp"
#include "edvrp/protocol.hpp"
#include "edvrp/rng.hpp"
#include "edvrp/scenario.hpp"
#include "edvrp/solvers.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace edvrp;

namespace {

constexpr double kRelTol = 1e-9;
constexpr double kOgaMinGain = 0.30;
constexpr double kOgaMaxSolveS = 20.0;
constexpr double kMinStepsPerS = 5000.0;

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

void oracle_equivalence() {
  constexpr int kInstances = 200;
  long plans = 0;
  int mismatches = 0;
  int exact_not_optimal = 0;
  int beaten = 0;
  int max_lines = 0;
  for (int i = 0; i < kInstances; ++i) {
    const int plots = 1 + i % 2;
    const int vehicles = 1 + (i / 2) % 2;
    const auto mode = (i / 4) % 2 ? TerminalMode::PerVehicle : TerminalMode::SingleDepot;
    const auto s = to_scenario(generate_scenario(
        fixtures::tiny_spec(derive_seed(11, static_cast<std::uint64_t>(i)), plots, vehicles, 1, 6 / plots, mode)));
    const auto& g = s.graph;
    max_lines = std::max(max_lines, g.num_lines());
    double best[3] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()};
    oracle::enumerate_plans(g, [&](const Plan& p) {
      ++plans;
      const auto o = oracle::evaluate(g, s.vehicles, p);
      const auto e = evaluate_plan(g, s.vehicles, p);
      if (o.s != e.total_transfer_distance_m || o.t != e.makespan_s || o.c != e.total_fuel_L) ++mismatches;
      best[0] = std::min(best[0], o.s);
      best[1] = std::min(best[1], o.t);
      best[2] = std::min(best[2], o.c);
    });
    GAConfig ga;
    ga.population_size = 32;
    ga.generations = 40;
    ga.time_budget_s = 0.0;
    ga.seed = static_cast<std::uint64_t>(i);
    for (int k = 0; k < 3; ++k) {
      const auto obj = static_cast<Objective>(k);
      const auto ex = solve_exact(g, s.vehicles, obj);
      const double v = ex.objectives.value(obj);
      if (v != best[k]) ++exact_not_optimal;
      const Plan others[] = {solve_random(g, s.vehicles, static_cast<std::uint64_t>(i)),
                             solve_greedy(g, s.vehicles, obj), solve_oga(g, s.vehicles, obj, ga).plan};
      for (const Plan& p : others) {
        if (evaluate_plan(g, s.vehicles, p).value(obj) < v) ++beaten;
      }
    }
  }
  report("oracle_equivalence",
         mismatches == 0 && exact_not_optimal == 0 && beaten == 0 && max_lines <= 6,
         std::to_string(kInstances) + " instances (L<=" + std::to_string(max_lines) + ", M<=2), " +
             std::to_string(plans) + " plans, evaluate mismatches " + std::to_string(mismatches) +
             ", exact != enumeration optimum " + std::to_string(exact_not_optimal) + ", exact beaten " +
             std::to_string(beaten));
}

std::vector<std::shared_ptr<const Scenario>> episode_pool(std::uint64_t base, int count) {
  std::vector<std::shared_ptr<const Scenario>> pool;
  for (int i = 0; i < count; ++i) {
    ScenarioSpec spec;
    spec.seed = derive_seed(base, static_cast<std::uint64_t>(i));
    spec.num_plots = 1 + i % 4;
    spec.num_vehicles = 1 + (i / 4) % 5;
    spec.min_lines_per_plot = 2;
    spec.max_lines_per_plot = 10;
    spec.mode = i % 2 ? TerminalMode::PerVehicle : TerminalMode::SingleDepot;
    pool.push_back(std::make_shared<const Scenario>(to_scenario(generate_scenario(spec))));
  }
  return pool;
}

void telescoping() {
  constexpr int kEpisodes = 10000;
  const auto pool = episode_pool(21, 100);
  double worst_s = 0.0;
  double worst_t = 0.0;
  double worst_c = 0.0;
  for (int e = 0; e < kEpisodes; ++e) {
    const auto& sc = pool[static_cast<std::size_t>(e) % pool.size()];
    Environment env(sc, RewardConfig{});
    env.reset();
    const Policy policy = random_policy(derive_seed(22, static_cast<std::uint64_t>(e)));
    double rs = 0.0;
    double rt = 0.0;
    double rc = 0.0;
    while (!env.state().done) {
      const auto r = env.step(policy(env));
      rs += r.rewards.distance_m;
      rt += r.rewards.time_s;
      rc += r.rewards.fuel_L;
    }
    const auto o = evaluate_plan(sc->graph, sc->vehicles, env.state().plan);
    worst_s = std::max(worst_s, std::abs(rs - o.total_transfer_distance_m));
    worst_t = std::max(worst_t, rel(rt, o.makespan_s));
    worst_c = std::max(worst_c, rel(rc, o.total_fuel_L));
  }
  report("telescoping", worst_s == 0.0 && worst_t <= kRelTol && worst_c <= kRelTol,
         fmt("10000 episodes, max |sum r^s - s_P| = %g, max rel time %.3g, max rel fuel %.3g (tol 1e-9)",
             worst_s, worst_t, worst_c));
}

void mask_fuzz() {
  constexpr int kEpisodes = 10000;
  const auto pool = episode_pool(31, 100);
  int invalid = 0;
  int bad_length = 0;
  long masked_tries = 0;
  int masked_accepted = 0;
  for (int e = 0; e < kEpisodes; ++e) {
    const auto& sc = pool[static_cast<std::size_t>(e) % pool.size()];
    Environment env(sc, RewardConfig{});
    env.reset();
    Rng rng(derive_seed(32, static_cast<std::uint64_t>(e)));
    const Policy policy = random_policy(derive_seed(33, static_cast<std::uint64_t>(e)));
    int steps = 0;
    while (!env.state().done) {
      const auto mask = env.mask();
      std::vector<int> masked;
      for (std::size_t a = 0; a < mask.size(); ++a) {
        if (!mask[a]) masked.push_back(static_cast<int>(a));
      }
      if (!masked.empty()) {
        ++masked_tries;
        const int pick = masked[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(masked.size()) - 1))];
        try {
          env.step_index(pick);
          ++masked_accepted;
        } catch (const Error&) {
        }
      }
      env.step(policy(env));
      ++steps;
    }
    const auto& g = sc->graph;
    if (!validate_plan(g, env.state().plan).valid()) ++invalid;
    if (steps != g.num_lines() + g.num_vehicles() - 1) ++bad_length;
  }
  report("mask_fuzz", invalid == 0 && bad_length == 0 && masked_accepted == 0,
         "10000 episodes, invalid plans " + std::to_string(invalid) + ", wrong lengths " +
             std::to_string(bad_length) + ", masked actions accepted " + std::to_string(masked_accepted) +
             " of " + std::to_string(masked_tries));
}

void oga_vs_ra() {
  constexpr int kScenarios = 100;
  double ra[3] = {0, 0, 0};
  double oga[3] = {0, 0, 0};
  double slowest = 0.0;
  for (int i = 0; i < kScenarios; ++i) {
    ScenarioSpec spec;
    spec.seed = derive_seed(2024, static_cast<std::uint64_t>(i));
    spec.num_plots = 2 + i % 5;
    spec.num_vehicles = 2 + (i / 5) % 5;
    const auto s = to_scenario(generate_scenario(spec));
    const auto r = evaluate_plan(s.graph, s.vehicles, solve_random(s.graph, s.vehicles, spec.seed));
    for (int k = 0; k < 3; ++k) {
      const auto obj = static_cast<Objective>(k);
      GAConfig config;
      config.population_size = 64;
      config.generations = 300;
      config.time_budget_s = kOgaMaxSolveS;
      config.seed = spec.seed;
      const auto start = std::chrono::steady_clock::now();
      const auto res = solve_oga(s.graph, s.vehicles, obj, config);
      slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      ra[k] += r.value(obj);
      oga[k] += res.objectives.value(obj);
    }
  }
  double gain[3];
  for (int k = 0; k < 3; ++k) gain[k] = 1.0 - oga[k] / ra[k];
  const bool ok = std::min({gain[0], gain[1], gain[2]}) >= kOgaMinGain && slowest <= kOgaMaxSolveS;
  report("oga_vs_ra", ok,
         fmt("100 scenarios, OGA below RA by %.1f%% distance, %.1f%% time, %.1f%% fuel (need >=30%%), ",
             100 * gain[0], 100 * gain[1], 100 * gain[2]) +
             fmt("slowest OGA solve %.2fs (limit 20s)", slowest));
}

void dynamic_conservation() {
  constexpr int kScenarios = 50;
  int work_mismatch = 0;
  double worst = 0.0;
  int runs = 0;
  const PlanSolver greedy = [](const PlanRequest& r) {
    return solve_greedy(r.scenario.graph, r.scenario.vehicles, r.objective);
  };
  for (DynamicTask task : {DynamicTask::FieldIncrease, DynamicTask::VehicleDecrease}) {
    for (int i = 0; i < kScenarios; ++i) {
      ScenarioSpec spec;
      spec.seed = derive_seed(41, static_cast<std::uint64_t>(i));
      spec.num_plots = 2 + i % 4;
      spec.num_vehicles = 2 + (i / 4) % 3;
      spec.mode = i % 3 ? TerminalMode::PerVehicle : TerminalMode::SingleDepot;
      const auto gen = generate_scenario(spec);
      DynamicConfig config;
      config.task = task;
      config.fraction = 0.2 + 0.6 * static_cast<double>(i % 7) / 6.0;
      config.objective = static_cast<Objective>(i % 3);
      config.finish_line = i % 2 == 0;
      const PlanSolver phase1 = [i](const PlanRequest& r) {
        return solve_random(r.scenario.graph, r.scenario.vehicles, static_cast<std::uint64_t>(i));
      };
      const auto o = run_dynamic(gen, config, phase1, greedy);
      ++runs;

      double line_sum = 0.0;
      for (const auto& l : gen.layout.lines) line_sum += l.length_m;
      if (o.totals.worked_m != o.line_total_m || o.line_total_m != line_sum) ++work_mismatch;

      // Totals rebuilt from the pieces, per vehicle and overall.
      std::vector<double> d(gen.vehicles.size(), 0.0);
      std::vector<double> t(gen.vehicles.size(), 0.0);
      std::vector<double> c(gen.vehicles.size(), 0.0);
      for (std::size_t k = 0; k < gen.vehicles.size(); ++k) {
        d[k] = o.snapshot.vehicles[k].transfer_m;
        t[k] = o.snapshot.vehicles[k].time_s;
        c[k] = o.snapshot.vehicles[k].fuel_L;
      }
      for (const auto& r : o.rearrangement.returns) {
        const auto k = static_cast<std::size_t>(r.vehicle);
        d[k] += r.transfer_m;
        t[k] += r.time_s;
        c[k] += r.fuel_L;
      }
      for (std::size_t j = 0; j < o.phase2_objectives.per_vehicle.size(); ++j) {
        const auto k = static_cast<std::size_t>(o.rearrangement.vehicle_map[j]);
        d[k] += o.phase2_objectives.per_vehicle[j].transfer_m;
        t[k] += o.phase2_objectives.per_vehicle[j].time_s;
        c[k] += o.phase2_objectives.per_vehicle[j].fuel_L;
      }
      double dsum = 0.0;
      double tmax = 0.0;
      double csum = 0.0;
      for (std::size_t k = 0; k < d.size(); ++k) {
        worst = std::max({worst, rel(d[k], o.totals.per_vehicle[k].transfer_m),
                          rel(t[k], o.totals.per_vehicle[k].time_s), rel(c[k], o.totals.per_vehicle[k].fuel_L)});
        dsum += d[k];
        tmax = std::max(tmax, t[k]);
        csum += c[k];
      }
      worst = std::max({worst, rel(dsum, o.totals.distance_m), rel(tmax, o.totals.time_s),
                        rel(csum, o.totals.fuel_L)});
    }
  }
  report("dynamic_conservation", work_mismatch == 0 && worst <= kRelTol,
         std::to_string(runs) + " runs over both tasks, work mismatches " + std::to_string(work_mismatch) +
             fmt(", max rel additivity error %.3g (tol 1e-9)", worst));
}

void env_throughput() {
  constexpr int kConnections = 8;
  constexpr int kEpisodesPerConnection = 8;
  constexpr int kRounds = 10;
  auto service = std::make_shared<EnvService>();
  Server server(service, "127.0.0.1:0");
  const std::string endpoint = "127.0.0.1:" + std::to_string(server.start());
  ScenarioSpec spec;
  spec.num_plots = 3;
  spec.num_vehicles = 3;
  spec.seed = 5;
  const Json scenario = scenario_to_json(to_scenario(generate_scenario(spec)));

  std::atomic<long> steps{0};
  std::atomic<int> errors{0};
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::thread> threads;
  for (int c = 0; c < kConnections; ++c) {
    threads.emplace_back([&, c] {
      try {
        LineClient client(endpoint);
        const std::string session = client.request(Json{{"v", 1}, {"type", "hello"}})["session"];
        client.request(Json{{"v", 1}, {"type", "load_scenario"}, {"session", session}, {"scenario", scenario}});
        Rng rng(derive_seed(51, static_cast<std::uint64_t>(c)));
        for (int round = 0; round < kRounds; ++round) {
          std::vector<Json> masks(kEpisodesPerConnection);
          for (int e = 0; e < kEpisodesPerConnection; ++e) {
            masks[static_cast<std::size_t>(e)] = client.request(Json{
                {"v", 1}, {"type", "reset"}, {"session", session}, {"episode", std::to_string(e)},
                {"include_graph", false}})["mask"];
          }
          std::vector<bool> done(kEpisodesPerConnection, false);
          int left = kEpisodesPerConnection;
          while (left > 0) {
            std::vector<int> sent;
            for (int e = 0; e < kEpisodesPerConnection; ++e) {
              if (done[static_cast<std::size_t>(e)]) continue;
              std::vector<int> legal;
              const auto& m = masks[static_cast<std::size_t>(e)];
              for (std::size_t a = 0; a < m.size(); ++a) {
                if (m[a].get<int>() == 1) legal.push_back(static_cast<int>(a));
              }
              const int pick = legal[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(legal.size()) - 1))];
              client.send(Json{{"v", 1}, {"type", "step"}, {"session", session}, {"episode", std::to_string(e)},
                               {"action_index", pick}}.dump());
              sent.push_back(e);
            }
            for (int e : sent) {
              const Json r = Json::parse(client.receive());
              if (!r.value("ok", false)) {
                ++errors;
                return;
              }
              masks[static_cast<std::size_t>(e)] = r["mask"];
              ++steps;
              if (r["done"].get<bool>()) {
                done[static_cast<std::size_t>(e)] = true;
                --left;
              }
            }
          }
        }
      } catch (const std::exception&) {
        ++errors;
      }
    });
  }
  for (auto& t : threads) t.join();
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  server.stop();
  const double rate = static_cast<double>(steps.load()) / elapsed;
  report("env_throughput", errors == 0 && rate >= kMinStepsPerS,
         fmt("%.0f steps in %.2fs over 64 concurrent episodes (8 TCP connections): %.0f steps/s (need >=5000)",
             static_cast<double>(steps.load()), elapsed, rate) +
             (errors ? ", errors " + std::to_string(errors.load()) : std::string()));
}

}  // namespace

int main() {
  oracle_equivalence();
  telescoping();
  mask_fuzz();
  oga_vs_ra();
  dynamic_conservation();
  env_throughput();
  std::printf("%s: %d failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
