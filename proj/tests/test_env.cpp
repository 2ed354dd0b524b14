#include <doctest.h>

#include <cmath>

#include "edvrp/env.hpp"
#include "edvrp/error.hpp"
#include "edvrp/scenario.hpp"
#include "edvrp/solvers.hpp"
#include "fixtures.hpp"

using namespace edvrp;

namespace {

std::shared_ptr<Scenario> two_line_scenario(int vehicles) {
  auto s = std::make_shared<Scenario>();
  s->id = "two-line";
  s->graph = fixtures::explicit_graph(vehicles, TerminalMode::SingleDepot, {10.0, 20.0},
                                      [](int a, int b, int ma, int mb) {
                                        if (a == b) return a < 2 && ma != mb ? 5.0 : 0.0;
                                        return 10.0 + a + b + ma + 2 * mb;
                                      });
  s->vehicles.assign(static_cast<std::size_t>(vehicles), VehicleParams{1.0, 2.0, 0.01, 0.005});
  return s;
}

std::shared_ptr<Scenario> regular_scenario(int lines, int vehicles) {
  auto s = std::make_shared<Scenario>();
  s->id = "regular";
  s->graph = derive_task_graph(fixtures::regular_plot_layout(lines, 6.0, 100.0), vehicles,
                               TerminalMode::SingleDepot);
  s->vehicles.assign(static_cast<std::size_t>(vehicles), VehicleParams{1.5, 3.0, 0.008, 0.006});
  return s;
}

}  // namespace

TEST_CASE("reset exposes every entrance and the separator") {
  Environment env(two_line_scenario(2), {});
  CHECK(env.action_count() == 5);
  CHECK(env.mask() == std::vector<std::uint8_t>{1, 1, 1, 1, 1});
  CHECK(env.action_at(4).is_separator());
  CHECK(env.action_index(Action{1, 1}) == 3);

  Environment single(two_line_scenario(1), {});
  CHECK(single.mask() == std::vector<std::uint8_t>{1, 1, 1, 1, 0});
  CHECK(single.legal_count() == 4);
}

TEST_CASE("first reward is the depot-to-entrance distance") {
  const auto s = two_line_scenario(2);
  Environment env(s, {});
  const auto r = env.step(Action{1, 1});
  const int depot = s->graph.start_node(0);
  CHECK(r.rewards.distance_m == s->graph.distance(depot, 1, 0, 1));
  CHECK(r.rewards.time_s == doctest::Approx(r.rewards.distance_m / 2.0 + 20.0));
  CHECK_FALSE(r.done);
  // Line 1 is taken; the other vehicle may start.
  CHECK(env.mask() == std::vector<std::uint8_t>{1, 1, 0, 0, 1});
}

TEST_CASE("choosing the depot M times is rejected without changing state") {
  Environment env(two_line_scenario(2), {});
  env.step(Action{kSeparator, 0});
  CHECK_FALSE(env.is_legal(Action{kSeparator, 0}));
  const auto before = env.state();
  const auto objectives = env.objectives();
  try {
    env.step(Action{kSeparator, 0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IllegalAction);
  }
  CHECK(env.state().plan == before.plan);
  CHECK(env.state().steps == before.steps);
  CHECK(env.state().separator_count == 1);
  CHECK(env.objectives().total_transfer_distance_m == objectives.total_transfer_distance_m);
  CHECK_THROWS_AS(env.step(Action{0, 3}), Error);
  CHECK(env.state().steps == 1);
}

TEST_CASE("episode ends after L + M - 1 steps and rejects further actions") {
  Environment env(two_line_scenario(2), {});
  env.step(Action{0, 0});
  env.step(Action{kSeparator, 0});
  const auto r = env.step(Action{1, 0});
  CHECK(r.done);
  CHECK(env.state().steps == 3);
  CHECK(env.legal_count() == 0);
  CHECK_THROWS_AS(env.step(Action{0, 1}), Error);
  env.reset();
  CHECK(env.state().steps == 0);
  CHECK(env.legal_count() == 5);
}

TEST_CASE("random rollouts always produce valid plans of length L + M - 1") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto mode = seed % 3 == 0 ? TerminalMode::PerVehicle : TerminalMode::SingleDepot;
    const auto s = fixtures::make_scenario(
        fixtures::tiny_spec(seed, 1 + static_cast<int>(seed % 3), 1 + static_cast<int>(seed % 4), 2, 6, mode));
    const auto result = rollout(s, random_policy(seed));
    CHECK(static_cast<int>(result.plan.actions.size()) ==
          s->graph.num_lines() + s->graph.num_vehicles() - 1);
    CHECK(validate_plan(s->graph, result.plan).valid());
    CHECK(result.trace.size() == result.plan.actions.size());
  }
}

TEST_CASE("rollouts are deterministic and replay to the same rewards") {
  const auto s = fixtures::make_scenario(fixtures::tiny_spec(12, 2, 3, 3, 6));
  const auto a = rollout(s, random_policy(5));
  const auto b = rollout(s, random_policy(5));
  CHECK(a.plan == b.plan);
  Environment env(s, {});
  for (std::size_t i = 0; i < a.plan.actions.size(); ++i) {
    const auto r = env.step(a.plan.actions[i]);
    CHECK(r.rewards.distance_m == a.trace[i].distance_m);
    CHECK(r.rewards.time_s == a.trace[i].time_s);
    CHECK(r.rewards.fuel_L == a.trace[i].fuel_L);
  }
  CHECK(env.state().done);
}

TEST_CASE("distance bonus follows the global step counter") {
  const auto s = two_line_scenario(1);
  auto config = RewardConfig::training_default(Objective::Time);
  config.bonus_cutoff_steps = 1;
  Environment env(s, config);
  const auto first = env.step(Action{0, 0});
  CHECK(first.combined == doctest::Approx(first.rewards.time_s + first.rewards.distance_m));
  const auto second = env.step(Action{1, 0});
  CHECK(second.combined == second.rewards.time_s);
  env.reset(5);
  const auto late = env.step(Action{0, 0});
  CHECK(late.combined == late.rewards.time_s);
}

TEST_CASE("greedy matches the exact optimum on a regular plot") {
  for (int n = 2; n <= 6; ++n) {
    const auto s = regular_scenario(n, 1);
    const auto greedy = evaluate_plan(s->graph, s->vehicles, solve_greedy(s->graph, s->vehicles, Objective::Distance));
    const auto exact = solve_exact(s->graph, s->vehicles, Objective::Distance);
    CHECK(greedy.total_transfer_distance_m == doctest::Approx(exact.objectives.total_transfer_distance_m).epsilon(1e-12));
  }
}

TEST_CASE("greedy plans are valid for every objective") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto s = fixtures::make_scenario(fixtures::tiny_spec(seed, 3, 1 + static_cast<int>(seed % 4), 4, 9));
    for (auto obj : {Objective::Distance, Objective::Time, Objective::Fuel}) {
      CHECK(validate_plan(s->graph, solve_greedy(s->graph, s->vehicles, obj)).valid());
    }
  }
}

TEST_CASE("forced first actions restrict the mask") {
  TaskGraph::Options options;
  options.forced_first = {Action{2, 1}, Action{0, 0}};
  auto s = std::make_shared<Scenario>();
  s->graph = fixtures::explicit_graph(2, TerminalMode::PerVehicle, {10.0, 10.0, 10.0},
                                      [](int a, int b, int, int) { return a == b ? 0.0 : 4.0; },
                                      options);
  s->vehicles.assign(2, VehicleParams{1.0, 2.0, 0.01, 0.005});
  Environment env(s, {});
  CHECK(env.mask() == std::vector<std::uint8_t>{0, 0, 0, 0, 0, 1, 0});
  env.step(Action{2, 1});
  // Line 0 belongs to the second vehicle.
  CHECK(env.mask() == std::vector<std::uint8_t>{0, 0, 1, 1, 0, 0, 1});
  env.step(Action{kSeparator, 0});
  CHECK(env.mask() == std::vector<std::uint8_t>{1, 0, 0, 0, 0, 0, 0});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CHECK(validate_plan(s->graph, rollout(s, random_policy(seed)).plan).valid());
  }
}
