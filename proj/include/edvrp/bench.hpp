#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "edvrp/io.hpp"
#include "edvrp/model.hpp"
#include "edvrp/objectives.hpp"
#include "edvrp/solvers.hpp"

namespace edvrp {

// Solver selection shared by the CLI and the benchmark runner.
struct SolverSpec {
  std::string algo = "ra";  // ra | oga | exact | greedy | policy
  GAConfig ga;              // oga; ga.seed is replaced by the run seed
  std::string endpoint;     // policy: host:port of a served policy
  FuelConvention fuel_convention = FuelConvention::RateTime;
};

SolverSpec solver_spec_from_json(const Json& j);

struct SolveOutcome {
  Plan plan;
  ObjectiveVector objectives;
  double runtime_s = 0.0;
};

SolveOutcome solve_scenario(const Scenario& scenario, const SolverSpec& solver, Objective objective,
                            std::uint64_t seed);

inline constexpr int kManifestVersion = 1;

struct ScenarioSource {
  std::filesystem::path path;  // empty for generated scenarios
  bool generated = false;
  int plots = 0;
  int vehicles = 0;
  std::uint64_t seed = 0;
  TerminalMode mode = TerminalMode::PerVehicle;
};

struct Manifest {
  std::vector<ScenarioSource> scenarios;
  std::vector<SolverSpec> solvers;
  std::vector<Objective> objectives;
  std::vector<std::uint64_t> seeds;
};

// Relative scenario paths are resolved against `base_dir`.
Manifest manifest_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Manifest read_manifest(const std::filesystem::path& path);

struct BenchRow {
  std::string scenario_id;
  std::string algo;
  std::string objective;
  std::uint64_t seed = 0;
  double distance_m = 0.0;
  double time_s = 0.0;
  double fuel_L = 0.0;
  double runtime_s = 0.0;
  double total_distance_m = 0.0;  // transfer + working
};

std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& row);

struct SummaryRow {
  std::string algo;
  std::string objective;
  int count = 0;
  double distance_m = 0.0;
  double time_s = 0.0;
  double fuel_L = 0.0;
  double runtime_s = 0.0;
};

// Means per (algo, objective) in first-appearance order.
std::vector<SummaryRow> summarize(const std::vector<BenchRow>& rows);
// Columns Distance, Time, Fuel, Runtime.
std::string format_summary(const std::vector<SummaryRow>& summary);

struct BenchOptions {
  int jobs = 1;
  bool deterministic = false;  // report runtime_s as 0
  std::ostream* csv = nullptr;  // rows are written and flushed in manifest order
};

struct BenchFailure {
  std::string scenario;
  std::string algo;
  std::string objective;
  std::uint64_t seed = 0;
  std::string message;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<BenchFailure> failures;
  bool complete() const { return failures.empty(); }
};

// Rows are ordered scenario, solver, objective, seed. Scenario files are all
// checked before anything runs; a missing one throws Io naming the path.
BenchResult run_benchmark(const Manifest& manifest, const BenchOptions& options = {});

}  // namespace edvrp
