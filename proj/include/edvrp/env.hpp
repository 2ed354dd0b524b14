#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "edvrp/model.hpp"
#include "edvrp/objectives.hpp"
#include "edvrp/rng.hpp"

namespace edvrp {

struct EpisodeState {
  std::vector<std::uint8_t> selected;  // per working line
  int separator_count = 0;
  int current_vehicle = 0;
  int steps = 0;
  Plan plan;  // generated sequence so far
  bool done = false;
};

struct StepResult {
  StepRewards rewards;
  double combined = 0.0;
  bool done = false;
};

// The sequential decision process over a scenario. Actions are flattened
// (node, entrance) pairs: index 2*line + entrance for working lines and 2L for
// the separator, whose entrance is ignored.
class Environment {
 public:
  Environment(std::shared_ptr<const Scenario> scenario, RewardConfig config);

  const Scenario& scenario() const { return *scenario_; }
  const TaskGraph& graph() const { return scenario_->graph; }
  const RewardConfig& reward_config() const { return config_; }
  void set_reward_config(const RewardConfig& config) { config_ = config; }

  // `step_base` is the global timestep of this episode's first action; the
  // distance-bonus cutoff is measured against it.
  void reset(std::int64_t step_base = 0);

  // Throws IllegalAction (state untouched) if the action is masked.
  StepResult step(Action action);
  StepResult step_index(int action_index) { return step(action_at(action_index)); }

  int action_count() const { return 2 * graph().num_lines() + 1; }
  int action_index(Action action) const;
  Action action_at(int index) const;

  bool is_legal(Action action) const;
  std::vector<std::uint8_t> mask() const;
  void fill_mask(std::span<std::uint8_t> out) const;
  int legal_count() const;

  const EpisodeState& state() const { return state_; }
  const PlanAccumulator& accumulator() const { return acc_; }
  const std::vector<StepRewards>& trace() const { return trace_; }
  std::int64_t step_base() const { return step_base_; }
  // Objectives of the (possibly partial) plan generated so far.
  ObjectiveVector objectives() const { return acc_.result(); }

 private:
  bool forced_pending() const;

  std::shared_ptr<const Scenario> scenario_;
  RewardConfig config_;
  EpisodeState state_;
  PlanAccumulator acc_;
  std::vector<StepRewards> trace_;
  int remaining_lines_ = 0;
  std::int64_t step_base_ = 0;
};

// A policy picks an unmasked action given the environment.
using Policy = std::function<Action(const Environment&)>;

// Uniform over all legal flattened actions.
Policy random_policy(std::uint64_t seed);

// Nearest-entrance construction heuristic. For time it starts a new vehicle
// once the current one exceeds its share of the estimated work; for fuel it
// hands all free work to the vehicle with the lowest working fuel per meter.
Policy greedy_policy(Objective objective);

struct RolloutResult {
  Plan plan;
  ObjectiveVector objectives;
  std::vector<StepRewards> trace;
  std::vector<double> combined;
};

// Runs one episode. Throws IllegalAction with a diagnostic if the policy
// selects a masked action.
RolloutResult rollout(std::shared_ptr<const Scenario> scenario, const Policy& policy,
                      const RewardConfig& config = {});

}  // namespace edvrp
