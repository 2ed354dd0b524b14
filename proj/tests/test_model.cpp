#include <doctest.h>

#include <cmath>

#include "edvrp/error.hpp"
#include "edvrp/model.hpp"
#include "edvrp/rng.hpp"
#include "edvrp/solvers.hpp"
#include "fixtures.hpp"

using namespace edvrp;

namespace {

TaskGraph uniform_graph(int lines, int vehicles, TerminalMode mode = TerminalMode::SingleDepot,
                        TaskGraph::Options options = {}) {
  return fixtures::explicit_graph(vehicles, mode, std::vector<double>(static_cast<std::size_t>(lines), 10.0),
                                  [](int a, int b, int, int) { return a == b ? 0.0 : 5.0; },
                                  std::move(options));
}

Action line(int node, int entrance) { return Action{node, entrance}; }
const Action sep{kSeparator, 0};

}  // namespace

TEST_CASE("validate_plan accepts a permutation with M-1 separators") {
  const auto g = uniform_graph(3, 2);
  const Plan plan{{line(0, 0), sep, line(2, 1), line(1, 0)}};
  const auto report = validate_plan(g, plan);
  CHECK(report.valid());
  CHECK(report.summary() == "valid");
}

TEST_CASE("validate_plan reports each violation kind") {
  const auto g = uniform_graph(3, 2);
  SUBCASE("duplicate") {
    const auto r = validate_plan(g, Plan{{line(0, 0), sep, line(0, 1), line(1, 0)}});
    CHECK(r.has(ViolationKind::DuplicateNode));
    CHECK(r.has(ViolationKind::MissingNode));
  }
  SUBCASE("separator overflow when the depot is chosen M times") {
    const auto r = validate_plan(g, Plan{{line(0, 0), sep, line(2, 1), sep, line(1, 0)}});
    CHECK(r.has(ViolationKind::SeparatorOverflow));
    CHECK_FALSE(r.has(ViolationKind::DuplicateNode));
  }
  SUBCASE("separator underflow") {
    const auto r = validate_plan(g, Plan{{line(0, 0), line(2, 1), line(1, 0)}});
    CHECK(r.has(ViolationKind::SeparatorUnderflow));
  }
  SUBCASE("entrance out of range") {
    const auto r = validate_plan(g, Plan{{line(0, 2), sep, line(2, 1), line(1, 0)}});
    CHECK(r.has(ViolationKind::EntranceOutOfRange));
  }
  SUBCASE("unknown node") {
    const auto r = validate_plan(g, Plan{{line(0, 0), sep, line(7, 1), line(1, 0), line(2, 0)}});
    CHECK(r.has(ViolationKind::UnknownNode));
  }
}

TEST_CASE("validate_plan enforces forced first actions") {
  TaskGraph::Options options;
  options.forced_first = {std::nullopt, Action{1, 1}};
  const auto g = uniform_graph(3, 2, TerminalMode::PerVehicle, options);
  CHECK(validate_plan(g, Plan{{line(0, 0), sep, line(1, 1), line(2, 0)}}).valid());
  CHECK(validate_plan(g, Plan{{line(0, 0), sep, line(1, 0), line(2, 0)}})
            .has(ViolationKind::ForcedFirstViolated));
  CHECK(validate_plan(g, Plan{{line(1, 1), line(0, 0), sep, line(2, 0)}})
            .has(ViolationKind::ForcedFirstViolated));
  CHECK(validate_plan(g, Plan{{line(0, 0), line(1, 1), line(2, 0), sep}})
            .has(ViolationKind::ForcedFirstViolated));
}

TEST_CASE("split_into_routes examples") {
  SUBCASE("two vehicles") {
    const auto routes = split_into_routes(Plan{{line(1, 0), sep, line(2, 1)}}, 2);
    REQUIRE(routes.size() == 2);
    CHECK(routes[0] == Route{line(1, 0)});
    CHECK(routes[1] == Route{line(2, 1)});
  }
  SUBCASE("single vehicle keeps the whole plan") {
    const Plan plan{{line(0, 1), line(1, 0), line(2, 1)}};
    const auto routes = split_into_routes(plan, 1);
    REQUIRE(routes.size() == 1);
    CHECK(routes[0] == plan.actions);
  }
  SUBCASE("wrong separator count is an error") {
    CHECK_THROWS_AS(split_into_routes(Plan{{line(0, 0), sep, sep}}, 2), Error);
  }
}

TEST_CASE("split then join reproduces random valid plans") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    const int m = static_cast<int>(rng.uniform_int(1, 4));
    const int l = static_cast<int>(rng.uniform_int(0, 9));
    const auto g = uniform_graph(l, m);
    const auto plan = solve_random(g, std::vector<VehicleParams>(static_cast<std::size_t>(m)), seed);
    REQUIRE(validate_plan(g, plan).valid());
    const auto routes = split_into_routes(plan, m);
    CHECK(static_cast<int>(routes.size()) == m);
    std::size_t total = 0;
    for (const auto& r : routes) total += r.size();
    CHECK(static_cast<int>(total) == l);
    CHECK(join_routes(routes) == plan);
  }
}

TEST_CASE("six lines over three vehicles split into route sizes summing to six") {
  const auto g = uniform_graph(6, 3);
  const std::vector<VehicleParams> fleet(3);
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto routes = split_into_routes(solve_random(g, fleet, seed), 3);
    REQUIRE(routes.size() == 3);
    CHECK(routes[0].size() + routes[1].size() + routes[2].size() == 6);
  }
}

TEST_CASE("task graph edge structure") {
  const auto g = uniform_graph(2, 2, TerminalMode::PerVehicle);
  const int s0 = g.start_node(0);
  const int e0 = g.end_node(0);
  CHECK(g.num_nodes() == 6);
  CHECK(g.has_edge(s0, 0));
  CHECK_FALSE(g.has_edge(0, s0));
  CHECK(g.has_edge(0, e0));
  CHECK_FALSE(g.has_edge(e0, 0));
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 0));
  CHECK_FALSE(g.has_edge(0, 0));
  CHECK_FALSE(g.has_edge(s0, e0));
  CHECK(g.node_features(s0) == std::array<double, 3>{0.0, 0.0, 0.0});
  CHECK_THROWS_AS(g.edge(s0, e0), Error);

  const auto depot = uniform_graph(2, 3);
  CHECK(depot.num_nodes() == 3);
  CHECK(depot.start_node(2) == depot.end_node(0));
}

TEST_CASE("task graph rejects malformed input") {
  CHECK_THROWS_AS(TaskGraph(1, TerminalMode::SingleDepot, {}, std::vector<double>(3)), Error);
  std::vector<WorkingLineNode> bad{{0.6, 0.6, 10.0, 0, -1}};
  CHECK_THROWS_AS(TaskGraph(1, TerminalMode::SingleDepot, bad, std::vector<double>(16)), Error);
  std::vector<WorkingLineNode> zero{{1.0, 0.0, 0.0, 0, -1}};
  CHECK_THROWS_AS(TaskGraph(1, TerminalMode::SingleDepot, zero, std::vector<double>(16)), Error);
}

TEST_CASE("generated graphs satisfy bidirectional symmetry") {
  const auto s = fixtures::make_scenario(fixtures::tiny_spec(11, 3, 2, 4, 8, TerminalMode::PerVehicle));
  const auto& g = s->graph;
  for (int i = 0; i < g.num_lines(); ++i) {
    for (int j = 0; j < g.num_lines(); ++j) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) CHECK(g.distance(i, j, a, b) == g.distance(j, i, b, a));
      }
    }
  }
}

TEST_CASE("vehicle params invariants") {
  CHECK_NOTHROW(VehicleParams{1.0, 2.0, 0.01, 0.005}.validate());
  CHECK_THROWS_AS((VehicleParams{2.0, 1.0, 0.01, 0.005}.validate()), Error);
  CHECK_THROWS_AS((VehicleParams{1.0, 2.0, 0.004, 0.005}.validate()), Error);
  CHECK_THROWS_AS((VehicleParams{0.0, 2.0, 0.01, 0.005}.validate()), Error);
}

TEST_CASE("length quantization keeps splits exact") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double l = quantize_length(rng.uniform(1.0, 500.0));
    const double p = quantize_length(rng.uniform(0.0, l));
    CHECK((l - p) + p == l);
  }
}
