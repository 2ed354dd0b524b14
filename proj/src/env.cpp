#include "edvrp/env.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "edvrp/error.hpp"

namespace edvrp {

Environment::Environment(std::shared_ptr<const Scenario> scenario, RewardConfig config)
    : scenario_(std::move(scenario)),
      config_(config),
      acc_(scenario_->graph, scenario_->vehicles, config.fuel_convention) {
  for (const auto& v : scenario_->vehicles) v.validate();
  reset();
}

void Environment::reset(std::int64_t step_base) {
  const auto& g = graph();
  step_base_ = step_base;
  acc_ = PlanAccumulator(g, scenario_->vehicles, config_.fuel_convention);
  state_ = EpisodeState{};
  state_.selected.assign(static_cast<std::size_t>(g.num_lines()), 0);
  trace_.clear();
  remaining_lines_ = g.num_lines();
  if (remaining_lines_ == 0 && g.num_vehicles() == 1) {
    acc_.finish();
    state_.done = true;
  }
}

int Environment::action_index(Action action) const {
  if (action.is_separator()) return 2 * graph().num_lines();
  return 2 * action.node + action.entrance;
}

Action Environment::action_at(int index) const {
  const int l = graph().num_lines();
  if (index < 0 || index > 2 * l) {
    throw Error(ErrorCode::IllegalAction, "action index " + std::to_string(index) + " out of range");
  }
  if (index == 2 * l) return Action{kSeparator, 0};
  return Action{index / 2, index % 2};
}

bool Environment::forced_pending() const {
  if (!acc_.route_empty()) return false;
  return graph().forced_first(state_.current_vehicle).has_value();
}

bool Environment::is_legal(Action action) const {
  if (state_.done) return false;
  const auto& g = graph();
  if (forced_pending()) {
    const auto forced = g.forced_first(state_.current_vehicle);
    return action == Action{forced->node, forced->entrance};
  }
  if (action.is_separator()) return state_.separator_count < g.num_vehicles() - 1;
  if (!g.is_line(action.node) || action.entrance < 0 || action.entrance > 1) return false;
  return !state_.selected[static_cast<std::size_t>(action.node)] && g.forced_owner(action.node) < 0;
}

void Environment::fill_mask(std::span<std::uint8_t> out) const {
  const auto& g = graph();
  const int l = g.num_lines();
  std::fill(out.begin(), out.end(), std::uint8_t{0});
  if (state_.done) return;
  if (forced_pending()) {
    out[static_cast<std::size_t>(action_index(*g.forced_first(state_.current_vehicle)))] = 1;
    return;
  }
  for (int j = 0; j < l; ++j) {
    const std::uint8_t ok =
        !state_.selected[static_cast<std::size_t>(j)] && g.forced_owner(j) < 0 ? 1 : 0;
    out[static_cast<std::size_t>(2 * j)] = ok;
    out[static_cast<std::size_t>(2 * j + 1)] = ok;
  }
  out[static_cast<std::size_t>(2 * l)] = state_.separator_count < g.num_vehicles() - 1 ? 1 : 0;
}

std::vector<std::uint8_t> Environment::mask() const {
  std::vector<std::uint8_t> m(static_cast<std::size_t>(action_count()));
  fill_mask(m);
  return m;
}

int Environment::legal_count() const {
  const auto m = mask();
  return std::accumulate(m.begin(), m.end(), 0);
}

StepResult Environment::step(Action action) {
  if (action.is_separator()) action.entrance = 0;
  if (!is_legal(action)) {
    throw Error(ErrorCode::IllegalAction,
                state_.done ? "episode is done"
                            : "action (" + std::to_string(action.node) + ", " +
                                  std::to_string(action.entrance) + ") is masked at step " +
                                  std::to_string(state_.steps));
  }
  const auto& g = graph();
  StepResult result;
  const bool last = (action.is_separator() ? remaining_lines_ == 0 : remaining_lines_ == 1) &&
                    state_.separator_count + (action.is_separator() ? 1 : 0) == g.num_vehicles() - 1;
  result.rewards = last ? acc_.apply_last(action) : acc_.apply(action);
  if (action.is_separator()) {
    ++state_.separator_count;
    ++state_.current_vehicle;
  } else {
    state_.selected[static_cast<std::size_t>(action.node)] = 1;
    --remaining_lines_;
  }
  state_.plan.actions.push_back(action);
  if (last) state_.done = true;
  result.combined = combine_reward(result.rewards, config_, step_base_ + state_.steps);
  ++state_.steps;
  result.done = state_.done;
  trace_.push_back(result.rewards);
  return result;
}

Policy random_policy(std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  auto buffer = std::make_shared<std::vector<std::uint8_t>>();
  return [rng, buffer](const Environment& env) {
    buffer->resize(static_cast<std::size_t>(env.action_count()));
    env.fill_mask(*buffer);
    const int legal = std::accumulate(buffer->begin(), buffer->end(), 0);
    if (legal == 0) throw Error(ErrorCode::IllegalAction, "no legal action available");
    auto pick = rng->uniform_int(0, legal - 1);
    for (std::size_t i = 0; i < buffer->size(); ++i) {
      if ((*buffer)[i] && pick-- == 0) return env.action_at(static_cast<int>(i));
    }
    return env.action_at(env.action_count() - 1);
  };
}

namespace {

// Nearest legal working-line action from the current position, if any.
std::optional<Action> nearest_line(const Environment& env, std::span<const std::uint8_t> mask) {
  const auto& g = env.graph();
  const auto& acc = env.accumulator();
  const int from = acc.position_node();
  const int exit = acc.route_empty() ? 0 : 1 - acc.position_entrance();
  std::optional<Action> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.num_lines(); ++j) {
    for (int e = 0; e < 2; ++e) {
      if (!mask[static_cast<std::size_t>(2 * j + e)]) continue;
      const double d = g.distance(from, j, exit, e);
      if (d < best_d) {
        best_d = d;
        best = Action{j, e};
      }
    }
  }
  return best;
}

}  // namespace

Policy greedy_policy(Objective objective) {
  auto buffer = std::make_shared<std::vector<std::uint8_t>>();
  return [objective, buffer](const Environment& env) {
    const auto& g = env.graph();
    const auto& vehicles = env.scenario().vehicles;
    buffer->resize(static_cast<std::size_t>(env.action_count()));
    env.fill_mask(*buffer);
    const auto& mask = *buffer;
    const bool sep_ok = mask.back() != 0;
    const Action separator{kSeparator, 0};
    const int k = env.state().current_vehicle;
    const int m = g.num_vehicles();

    auto line = nearest_line(env, mask);
    if (!line) {
      if (!sep_ok) throw Error(ErrorCode::IllegalAction, "no legal action available");
      return separator;
    }
    if (!sep_ok) return *line;

    if (objective == Objective::Time) {
      // Share of the total working length scaled by working speed.
      double work = 0.0;
      for (const auto& l : g.lines()) work += l.length_m;
      double speed = 0.0;
      for (const auto& v : vehicles) speed += v.v_w;
      const double target = work / speed;
      const auto& acc = env.accumulator();
      const auto& tally = acc.tallies()[static_cast<std::size_t>(k)];
      const auto& p = vehicles[static_cast<std::size_t>(k)];
      const int exit = acc.route_empty() ? 0 : 1 - acc.position_entrance();
      const double leg = g.distance(acc.position_node(), line->node, exit, line->entrance);
      const double after = tally_time(tally.transfer_m + leg,
                                      tally.work_m + g.line(line->node).length_m, p);
      if (!acc.route_empty() && after > target && k < m - 1) return separator;
      return *line;
    }

    // Distance and fuel: all free work goes to one chosen vehicle.
    int chosen = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int v = 0; v < m; ++v) {
      const auto& p = vehicles[static_cast<std::size_t>(v)];
      double score = 0.0;
      if (objective == Objective::Fuel) {
        score = p.c_w / p.v_w;
      } else {
        score = std::numeric_limits<double>::infinity();
        for (int j = 0; j < g.num_lines(); ++j) {
          for (int e = 0; e < 2; ++e) score = std::min(score, g.distance(g.start_node(v), j, 0, e));
        }
      }
      if (score < best) {
        best = score;
        chosen = v;
      }
    }
    // Other vehicles only do their forced line, which the mask already enforces.
    return k == chosen ? *line : separator;
  };
}

RolloutResult rollout(std::shared_ptr<const Scenario> scenario, const Policy& policy,
                      const RewardConfig& config) {
  Environment env(std::move(scenario), config);
  RolloutResult out;
  while (!env.state().done) {
    const Action a = policy(env);
    if (!env.is_legal(a)) {
      throw Error(ErrorCode::IllegalAction,
                  "policy chose masked action (" + std::to_string(a.node) + ", " +
                      std::to_string(a.entrance) + ") at step " +
                      std::to_string(env.state().steps) + " with " +
                      std::to_string(env.legal_count()) + " legal actions");
    }
    out.combined.push_back(env.step(a).combined);
  }
  out.plan = env.state().plan;
  out.objectives = env.objectives();
  out.trace = env.trace();
  return out;
}

}  // namespace edvrp
