#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "edvrp/model.hpp"

namespace edvrp {

enum class Objective { Distance = 0, Time = 1, Fuel = 2 };

// Accepts "s"/"t"/"c" as well as "distance"/"time"/"fuel".
Objective parse_objective(const std::string& text);
const char* objective_letter(Objective objective);

// `DistanceOverRate` divides distances by the fuel rates, d / c_f + l / c_w.
// `RateTime` integrates rate over time instead and yields liters.
enum class FuelConvention { RateTime, DistanceOverRate };

FuelConvention parse_fuel_convention(const std::string& text);
const char* fuel_convention_name(FuelConvention convention);

struct StepRewards {
  double distance_m = 0.0;  // r^s
  double time_s = 0.0;      // r^t
  double fuel_L = 0.0;      // r^c

  double channel(Objective objective) const;
};

struct VehicleTally {
  double transfer_m = 0.0;
  double work_m = 0.0;
  double time_s = 0.0;
  double fuel_L = 0.0;
  int lines = 0;
};

struct ObjectiveVector {
  double total_transfer_distance_m = 0.0;  // s_P, summed step by step in plan order
  double makespan_s = 0.0;                 // t_P = max_k t_k
  double total_fuel_L = 0.0;               // c_P = sum_k c_k
  double total_working_distance_m = 0.0;   // diagnostic; plan-invariant
  std::vector<VehicleTally> per_vehicle;

  double value(Objective objective) const;
};

// Road distance d*_{i j ē_i e_j}. `from_entrance` is the entrance used to enter
// `from`; the exit is its complement. Terminal entrances are ignored.
double step_reward_distance(const TaskGraph& graph, int from, int from_entrance, int to,
                            int to_entrance);

// Completion time of one vehicle's route, including the leg out of its start
// terminal and the final leg into its end terminal.
double vehicle_time(const TaskGraph& graph, int vehicle, const Route& route,
                    const VehicleParams& params);

// Increase of the running makespan when vehicle `vehicle` reaches
// `new_time`. `times` are the per-vehicle times before the action.
double time_increment_reward(std::span<const double> times, int vehicle, double new_time);

// Fuel under the chosen convention for one leg of `transfer_m` followed by a
// working line of `work_m`.
double fuel_increment_reward(double transfer_m, double work_m, const VehicleParams& params,
                             FuelConvention convention);

// Time and fuel of a vehicle from its accumulated transfer and working
// distances, grouped as S / v_f + W / v_w.
double tally_time(double transfer_m, double work_m, const VehicleParams& params);
double tally_fuel(double transfer_m, double work_m, const VehicleParams& params,
                  FuelConvention convention);

// Folds a plan one action at a time, producing the per-step distance, time and
// fuel rewards. The environment and evaluate_plan share this path, so the
// episode reward sums and the plan objectives are computed identically.
class PlanAccumulator {
 public:
  PlanAccumulator(const TaskGraph& graph, std::span<const VehicleParams> vehicles,
                  FuelConvention convention = FuelConvention::RateTime);

  // Appends a working line or separator to the current vehicle. Does not
  // check masks or duplicates; callers validate first.
  StepRewards apply(Action action);

  // The final action of a plan: appends it and closes the last route in the
  // same step. The transfer total grows by the whole step reward, so summing
  // step distances reproduces it exactly.
  StepRewards apply_last(Action action);

  // Closes the last vehicle's route with its return leg (plans with no
  // actions only).
  StepRewards finish();

  int current_vehicle() const { return vehicle_; }
  // Last node of the current vehicle's route and the entrance it was entered
  // by, or its start terminal (entrance 0) when the route is empty.
  int position_node() const { return position_node_; }
  int position_entrance() const { return position_entrance_; }
  bool route_empty() const { return route_empty_; }
  double running_makespan() const { return running_makespan_; }
  const std::vector<VehicleTally>& tallies() const { return tallies_; }
  std::vector<double> times() const;

  ObjectiveVector result() const;

 private:
  StepRewards advance(Action action);
  StepRewards add_leg(double transfer_m, double work_m);
  StepRewards close_vehicle();

  const TaskGraph* graph_;
  std::span<const VehicleParams> vehicles_;
  FuelConvention convention_;
  std::vector<VehicleTally> tallies_;
  int vehicle_ = 0;
  int position_node_ = 0;
  int position_entrance_ = 0;
  bool route_empty_ = true;
  double running_makespan_ = 0.0;
  double total_transfer_ = 0.0;
  double total_work_ = 0.0;
};

// Evaluates a complete plan. Throws InvalidPlan when validation fails.
// Applies a complete plan, using apply_last for its final action.
void fold_plan(PlanAccumulator& acc, const Plan& plan);

ObjectiveVector evaluate_plan(const TaskGraph& graph, std::span<const VehicleParams> vehicles,
                              const Plan& plan,
                              FuelConvention convention = FuelConvention::RateTime);

struct RewardConfig {
  Objective objective = Objective::Distance;
  bool distance_bonus = false;
  // Bonus applies while the global step index is below this; 0 = whole run.
  std::int64_t bonus_cutoff_steps = 0;
  double bonus_weight = 1.0;
  // Per-channel divisors (s, t, c) applied before combining; 1 = raw units.
  std::array<double, 3> scale{1.0, 1.0, 1.0};
  FuelConvention fuel_convention = FuelConvention::RateTime;

  // Objective with the bonus schedule used in training: time gets r^s for the
  // first 75,264 timesteps, fuel gets it for the whole run.
  static RewardConfig training_default(Objective objective);
};

double combine_reward(const StepRewards& rewards, const RewardConfig& config,
                      std::int64_t step_index);

}  // namespace edvrp
