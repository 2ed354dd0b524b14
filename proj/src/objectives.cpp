#include "edvrp/objectives.hpp"

#include <algorithm>

#include "edvrp/error.hpp"

namespace edvrp {

Objective parse_objective(const std::string& text) {
  if (text == "s" || text == "distance") return Objective::Distance;
  if (text == "t" || text == "time") return Objective::Time;
  if (text == "c" || text == "fuel") return Objective::Fuel;
  throw Error(ErrorCode::Parse, "unknown objective '" + text + "' (expected s, t or c)");
}

const char* objective_letter(Objective objective) {
  switch (objective) {
    case Objective::Distance: return "s";
    case Objective::Time: return "t";
    case Objective::Fuel: return "c";
  }
  return "?";
}

FuelConvention parse_fuel_convention(const std::string& text) {
  if (text == "rate_time") return FuelConvention::RateTime;
  if (text == "distance_over_rate") return FuelConvention::DistanceOverRate;
  throw Error(ErrorCode::Parse, "unknown fuel convention '" + text + "'");
}

const char* fuel_convention_name(FuelConvention convention) {
  return convention == FuelConvention::RateTime ? "rate_time" : "distance_over_rate";
}

double StepRewards::channel(Objective objective) const {
  switch (objective) {
    case Objective::Distance: return distance_m;
    case Objective::Time: return time_s;
    case Objective::Fuel: return fuel_L;
  }
  return 0.0;
}

double ObjectiveVector::value(Objective objective) const {
  switch (objective) {
    case Objective::Distance: return total_transfer_distance_m;
    case Objective::Time: return makespan_s;
    case Objective::Fuel: return total_fuel_L;
  }
  return 0.0;
}

double step_reward_distance(const TaskGraph& graph, int from, int from_entrance, int to,
                            int to_entrance) {
  if (!graph.has_edge(from, to)) {
    throw Error(ErrorCode::MissingEdge,
                "no edge " + std::to_string(from) + " -> " + std::to_string(to));
  }
  const int exit = graph.is_line(from) ? 1 - from_entrance : 0;
  const int entry = graph.is_line(to) ? to_entrance : 0;
  return graph.distance(from, to, exit, entry);
}

double tally_time(double transfer_m, double work_m, const VehicleParams& params) {
  return transfer_m / params.v_f + work_m / params.v_w;
}

double tally_fuel(double transfer_m, double work_m, const VehicleParams& params,
                  FuelConvention convention) {
  if (convention == FuelConvention::DistanceOverRate) {
    return transfer_m / params.c_f + work_m / params.c_w;
  }
  return params.c_f * (transfer_m / params.v_f) + params.c_w * (work_m / params.v_w);
}

double fuel_increment_reward(double transfer_m, double work_m, const VehicleParams& params,
                             FuelConvention convention) {
  return tally_fuel(transfer_m, work_m, params, convention);
}

double time_increment_reward(std::span<const double> times, int vehicle, double new_time) {
  (void)vehicle;
  double current = 0.0;
  for (double t : times) current = std::max(current, t);
  return std::max(new_time - current, 0.0);
}

double vehicle_time(const TaskGraph& graph, int vehicle, const Route& route,
                    const VehicleParams& params) {
  if (!(params.v_f > 0.0) || !(params.v_w > 0.0)) {
    throw Error(ErrorCode::InvalidSpec, "vehicle speeds must be positive");
  }
  if (route.empty()) {
    if (!graph.empty_route_returns()) return 0.0;
    return graph.distance(graph.start_node(vehicle), graph.end_node(vehicle), 0, 0) / params.v_f;
  }
  double transfer = 0.0;
  double work = 0.0;
  int node = graph.start_node(vehicle);
  int entrance = 0;
  for (const Action& a : route) {
    transfer += step_reward_distance(graph, node, entrance, a.node, a.entrance);
    work += graph.line(a.node).length_m;
    node = a.node;
    entrance = a.entrance;
  }
  transfer += step_reward_distance(graph, node, entrance, graph.end_node(vehicle), 0);
  return tally_time(transfer, work, params);
}

PlanAccumulator::PlanAccumulator(const TaskGraph& graph, std::span<const VehicleParams> vehicles,
                                 FuelConvention convention)
    : graph_(&graph),
      vehicles_(vehicles),
      convention_(convention),
      tallies_(static_cast<std::size_t>(graph.num_vehicles())) {
  if (vehicles.size() != static_cast<std::size_t>(graph.num_vehicles())) {
    throw Error(ErrorCode::InvalidSpec, "graph has " + std::to_string(graph.num_vehicles()) +
                                            " vehicles but " + std::to_string(vehicles.size()) +
                                            " parameter sets were given");
  }
  position_node_ = graph.start_node(0);
}

std::vector<double> PlanAccumulator::times() const {
  std::vector<double> out;
  out.reserve(tallies_.size());
  for (const auto& t : tallies_) out.push_back(t.time_s);
  return out;
}

StepRewards PlanAccumulator::add_leg(double transfer_m, double work_m) {
  auto& tally = tallies_[static_cast<std::size_t>(vehicle_)];
  const auto& params = vehicles_[static_cast<std::size_t>(vehicle_)];
  tally.transfer_m += transfer_m;
  tally.work_m += work_m;
  const double new_time = tally_time(tally.transfer_m, tally.work_m, params);
  StepRewards r;
  r.distance_m = transfer_m;
  r.time_s = std::max(new_time - running_makespan_, 0.0);
  r.fuel_L = fuel_increment_reward(transfer_m, work_m, params, convention_);
  tally.time_s = new_time;
  tally.fuel_L = tally_fuel(tally.transfer_m, tally.work_m, params, convention_);
  running_makespan_ = std::max(running_makespan_, new_time);
  total_work_ += work_m;
  return r;
}

StepRewards PlanAccumulator::close_vehicle() {
  const int end = graph_->end_node(vehicle_);
  if (route_empty_) {
    if (!graph_->empty_route_returns()) return {};
    return add_leg(graph_->distance(graph_->start_node(vehicle_), end, 0, 0), 0.0);
  }
  return add_leg(graph_->distance(position_node_, end, 1 - position_entrance_, 0), 0.0);
}

StepRewards PlanAccumulator::apply(Action action) {
  const StepRewards r = advance(action);
  total_transfer_ += r.distance_m;
  return r;
}

StepRewards PlanAccumulator::apply_last(Action action) {
  StepRewards r = advance(action);
  const StepRewards last = close_vehicle();
  r.distance_m += last.distance_m;
  r.time_s += last.time_s;
  r.fuel_L += last.fuel_L;
  total_transfer_ += r.distance_m;
  return r;
}

StepRewards PlanAccumulator::advance(Action action) {
  if (action.is_separator()) {
    if (vehicle_ + 1 >= graph_->num_vehicles()) {
      throw Error(ErrorCode::InvalidPlan, "separator after the last vehicle");
    }
    StepRewards r = close_vehicle();
    ++vehicle_;
    position_node_ = graph_->start_node(vehicle_);
    position_entrance_ = 0;
    route_empty_ = true;
    return r;
  }
  const int exit = route_empty_ ? 0 : 1 - position_entrance_;
  const double transfer = graph_->distance(position_node_, action.node, exit, action.entrance);
  StepRewards r = add_leg(transfer, graph_->line(action.node).length_m);
  auto& tally = tallies_[static_cast<std::size_t>(vehicle_)];
  ++tally.lines;
  position_node_ = action.node;
  position_entrance_ = action.entrance;
  route_empty_ = false;
  return r;
}

StepRewards PlanAccumulator::finish() {
  const StepRewards r = close_vehicle();
  total_transfer_ += r.distance_m;
  return r;
}

ObjectiveVector PlanAccumulator::result() const {
  ObjectiveVector out;
  out.total_transfer_distance_m = total_transfer_;
  out.total_working_distance_m = total_work_;
  out.per_vehicle = tallies_;
  for (const auto& t : tallies_) {
    out.makespan_s = std::max(out.makespan_s, t.time_s);
    out.total_fuel_L += t.fuel_L;
  }
  return out;
}

void fold_plan(PlanAccumulator& acc, const Plan& plan) {
  if (plan.actions.empty()) {
    acc.finish();
    return;
  }
  for (std::size_t i = 0; i + 1 < plan.actions.size(); ++i) acc.apply(plan.actions[i]);
  acc.apply_last(plan.actions.back());
}

ObjectiveVector evaluate_plan(const TaskGraph& graph, std::span<const VehicleParams> vehicles,
                              const Plan& plan, FuelConvention convention) {
  require_valid_plan(graph, plan);
  PlanAccumulator acc(graph, vehicles, convention);
  fold_plan(acc, plan);
  return acc.result();
}

RewardConfig RewardConfig::training_default(Objective objective) {
  RewardConfig config;
  config.objective = objective;
  if (objective == Objective::Time) {
    config.distance_bonus = true;
    config.bonus_cutoff_steps = 75264;
  } else if (objective == Objective::Fuel) {
    config.distance_bonus = true;
    config.bonus_cutoff_steps = 0;
  }
  return config;
}

double combine_reward(const StepRewards& rewards, const RewardConfig& config,
                      std::int64_t step_index) {
  const auto idx = static_cast<std::size_t>(config.objective);
  double value = rewards.channel(config.objective) / config.scale[idx];
  if (config.objective != Objective::Distance && config.distance_bonus &&
      (config.bonus_cutoff_steps == 0 || step_index < config.bonus_cutoff_steps)) {
    value += config.bonus_weight * rewards.distance_m / config.scale[0];
  }
  return value;
}

}  // namespace edvrp
