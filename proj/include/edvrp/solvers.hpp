#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "edvrp/model.hpp"
#include "edvrp/objectives.hpp"

namespace edvrp {

// Uniformly random valid plan: random order of lines and separators, random
// entrances. Forced first actions are moved to the front of their vehicle.
Plan solve_random(const TaskGraph& graph, std::span<const VehicleParams> vehicles,
                  std::uint64_t seed);

// Ordered genetic algorithm. Individuals are a token order (lines plus
// separators) and an entrance bit per line; OX1 crossover on the order,
// uniform crossover on entrances, tournament selection and elitism.
struct GAConfig {
  int population_size = 128;
  // Stops after this many generations (0 = unbounded) or when the time budget
  // runs out (0 = unbounded), whichever comes first. Both zero returns the
  // best initial individual.
  int generations = 0;
  double time_budget_s = 14.0;
  double crossover_rate = 0.9;
  double segment_reverse_rate = 0.3;
  double node_swap_rate = 0.2;
  double entrance_flip_rate = 0.2;
  double separator_move_rate = 0.2;
  int elitism_count = 2;
  int tournament_size = 3;
  std::uint64_t seed = 0;
  FuelConvention fuel_convention = FuelConvention::RateTime;

  void validate() const;
};

struct GAResult {
  Plan plan;
  ObjectiveVector objectives;
  // Best objective value after initialization and after each generation.
  std::vector<double> best_history;
  int generations = 0;
  double runtime_s = 0.0;
};

GAResult solve_oga(const TaskGraph& graph, std::span<const VehicleParams> vehicles,
                   Objective objective, const GAConfig& config = {});

struct ExactResult {
  Plan plan;
  ObjectiveVector objectives;
  std::uint64_t evaluated = 0;
};

inline constexpr int kExactMaxLines = 8;
inline constexpr int kExactMaxVehicles = 2;

// Exhaustive search over token orders x entrance bits. Ties go to the
// lexicographically smallest action sequence. Throws TooLarge beyond
// kExactMaxLines lines or kExactMaxVehicles vehicles.
ExactResult solve_exact(const TaskGraph& graph, std::span<const VehicleParams> vehicles,
                        Objective objective,
                        FuelConvention convention = FuelConvention::RateTime);

// Greedy nearest-entrance construction (see greedy_policy).
Plan solve_greedy(const TaskGraph& graph, std::span<const VehicleParams> vehicles,
                  Objective objective);

// Mean s_P, t_P, c_P over `samples` random plans; used to normalize reward
// channels before combining them.
std::array<double, 3> random_baseline_means(const TaskGraph& graph,
                                            std::span<const VehicleParams> vehicles, int samples,
                                            std::uint64_t seed);

}  // namespace edvrp
