#include <doctest.h>

#include <cmath>
#include <limits>

#include "edvrp/error.hpp"
#include "edvrp/io.hpp"
#include "edvrp/scenario.hpp"
#include "edvrp/solvers.hpp"
#include "fixtures.hpp"

using namespace edvrp;

namespace {

std::vector<std::vector<double>> floyd_warshall(const RoadGraph& roads) {
  const auto n = static_cast<std::size_t>(roads.num_vertices());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& e : roads.edges()) {
    const auto u = static_cast<std::size_t>(e.u);
    const auto v = static_cast<std::size_t>(e.v);
    d[u][v] = std::min(d[u][v], e.length_m);
    d[v][u] = std::min(d[v][u], e.length_m);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  }
  return d;
}

}  // namespace

TEST_CASE("generation is deterministic in the spec") {
  const auto spec = fixtures::tiny_spec(42, 3, 2, 5, 9, TerminalMode::PerVehicle);
  const auto a = generate_scenario(spec);
  const auto b = generate_scenario(spec);
  CHECK(a.id == "scn-42");
  CHECK(write_layout(a.layout) == write_layout(b.layout));
  CHECK(write_scenario(to_scenario(a)) == write_scenario(to_scenario(b)));
  auto other = spec;
  other.seed = 43;
  CHECK(write_layout(generate_scenario(other).layout) != write_layout(a.layout));
}

TEST_CASE("generated line counts respect the per-plot range") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = generate_scenario(fixtures::tiny_spec(seed, 4, 2, 5, 15));
    REQUIRE(g.layout.plots.size() == 4);
    for (const auto& plot : g.layout.plots) {
      CHECK(plot.lines.size() >= 5);
      CHECK(plot.lines.size() <= 15);
      CHECK(plot.spacing_m >= 4.0);
      CHECK(plot.spacing_m <= 10.0);
    }
    for (const auto& line : g.layout.lines) {
      CHECK(line.length_m > 0.0);
      CHECK(line.length_m == quantize_length(line.length_m));
    }
  }
}

TEST_CASE("sampled vehicles stay inside the experimental ranges") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const auto v = sample_vehicle(rng);
    CHECK(v.v_w >= 1.0);
    CHECK(v.v_w <= 3.3);
    CHECK(v.v_f >= std::max(v.v_w, 2.0));
    CHECK(v.v_f <= 6.94);
    CHECK(v.c_f >= 0.005);
    CHECK(v.c_f <= 0.008);
    CHECK(v.c_w >= std::max(v.c_f, 0.007));
    CHECK(v.c_w <= 0.01);
  }
}

TEST_CASE("invalid specs are rejected") {
  auto spec = fixtures::tiny_spec(1, 0, 2, 5, 9);
  CHECK_THROWS_AS(generate_scenario(spec), Error);
  spec.num_plots = 2;
  spec.num_vehicles = 0;
  CHECK_THROWS_AS(generate_scenario(spec), Error);
  spec.num_vehicles = 1;
  spec.min_lines_per_plot = 10;
  spec.max_lines_per_plot = 5;
  CHECK_THROWS_AS(generate_scenario(spec), Error);
  try {
    spec.num_plots = -1;
    generate_scenario(spec);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidSpec);
  }
}

TEST_CASE("a single 10 m road gives a 10 m transfer") {
  FieldLayout layout;
  auto& r = layout.roads;
  layout.depot_vertex = r.add_vertex({0.0, 0.0});
  const int a = r.add_vertex({10.0, 0.0});
  const int b = r.add_vertex({10.0, 80.0});
  r.add_edge(layout.depot_vertex, a, 10.0);
  layout.lines.push_back({0, {10.0, 0.0}, {10.0, 80.0}, a, b, 80.0});
  Plot plot;
  plot.lines = {0};
  layout.plots.push_back(plot);
  // b is only reachable by working the line, which is not a road.
  try {
    derive_task_graph(layout, 1, TerminalMode::SingleDepot);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DisconnectedRoads);
    CHECK(std::string(e.what()).find("entrance 1 of line 0") != std::string::npos);
  }
  r.add_edge(a, b, 80.0);
  const auto g = derive_task_graph(layout, 1, TerminalMode::SingleDepot);
  const int depot = g.start_node(0);
  CHECK(g.distance(depot, 0, 0, 0) == 10.0);
  CHECK(g.distance(depot, 0, 0, 1) == 90.0);
  CHECK(g.distance(0, depot, 0, 0) == 10.0);
  CHECK(g.distance(0, 0, 0, 1) == 80.0);
  CHECK(g.line(0).length_m == 80.0);
  CHECK(g.line(0).direction_cos == doctest::Approx(0.0));
  CHECK(g.line(0).direction_sin == doctest::Approx(1.0));
}

TEST_CASE("derived distances agree with Floyd-Warshall") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto gen = generate_scenario(fixtures::tiny_spec(seed, 3, 2, 5, 8, TerminalMode::PerVehicle));
    const auto g = derive_task_graph(gen.layout, 2, TerminalMode::PerVehicle);
    const auto fw = floyd_warshall(gen.layout.roads);
    auto vertex = [&](int node, int entrance) {
      if (g.is_line(node)) return gen.layout.line_vertex(node, entrance);
      const int t = node - g.num_lines();
      return t < 2 ? gen.layout.start_vertices[static_cast<std::size_t>(t)] : gen.layout.depot_vertex;
    };
    for (int i = 0; i < g.num_nodes(); ++i) {
      for (int j = 0; j < g.num_nodes(); ++j) {
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            const int ea = g.is_line(i) ? a : 0;
            const int eb = g.is_line(j) ? b : 0;
            const double expected =
                fw[static_cast<std::size_t>(vertex(i, ea))][static_cast<std::size_t>(vertex(j, eb))];
            CHECK(g.distance(i, j, a, b) == doctest::Approx(expected).epsilon(1e-12));
          }
        }
      }
    }
  }
}

TEST_CASE("derived distances satisfy the triangle inequality") {
  const auto s = fixtures::make_scenario(fixtures::tiny_spec(9, 2, 1, 5, 7));
  const auto& g = s->graph;
  const int n = g.num_lines();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            for (int c = 0; c < 2; ++c) {
              const double direct = g.distance(i, k, a, c);
              const double via = g.distance(i, j, a, b) + g.distance(j, k, b, c);
              CHECK(direct <= via * (1.0 + 1e-12));
            }
          }
        }
      }
    }
  }
}

TEST_CASE("plot subsets keep the first plots' lines") {
  const auto gen = generate_scenario(fixtures::tiny_spec(3, 4, 2, 5, 6));
  const std::vector<int> first{0, 1};
  const auto sub = derive_task_graph(gen.layout, 2, TerminalMode::SingleDepot, first);
  const auto expected = gen.layout.plots[0].lines.size() + gen.layout.plots[1].lines.size();
  CHECK(static_cast<std::size_t>(sub.num_lines()) == expected);
  for (int i = 0; i < sub.num_lines(); ++i) CHECK(sub.line(i).plot <= 1);
}

TEST_CASE("scenario files round-trip canonically") {
  for (auto mode : {TerminalMode::PerVehicle, TerminalMode::SingleDepot}) {
    const auto s = fixtures::make_scenario(fixtures::tiny_spec(17, 2, 3, 5, 7, mode));
    const std::string text = write_scenario(*s);
    const Scenario back = read_scenario(text);
    CHECK(back.id == s->id);
    CHECK(back.graph == s->graph);
    CHECK(back.vehicles.size() == s->vehicles.size());
    for (std::size_t k = 0; k < back.vehicles.size(); ++k) {
      CHECK(back.vehicles[k].v_w == s->vehicles[k].v_w);
      CHECK(back.vehicles[k].c_f == s->vehicles[k].c_f);
    }
    CHECK(write_scenario(back) == text);
  }
}

TEST_CASE("forced-first options survive a round trip") {
  TaskGraph::Options options;
  options.forced_first = {std::nullopt, Action{1, 1}};
  options.empty_route_returns = true;
  const auto g = fixtures::explicit_graph(2, TerminalMode::PerVehicle, {10.0, 12.5},
                                          [](int a, int b, int, int) { return a == b ? 0.0 : 3.25; },
                                          options);
  Scenario s{"forced", g, {VehicleParams{1.0, 2.0, 0.01, 0.005}, VehicleParams{2.0, 3.0, 0.009, 0.006}}};
  const Scenario back = read_scenario(write_scenario(s));
  CHECK(back.graph == g);
  CHECK(back.graph.forced_first(1) == Action{1, 1});
  CHECK(back.graph.empty_route_returns());
}

TEST_CASE("malformed scenario files are reported") {
  CHECK_THROWS_AS(read_scenario("{not json"), Error);
  const auto s = fixtures::make_scenario(fixtures::tiny_spec(2, 1, 1, 5, 5));
  auto j = scenario_to_json(*s);
  j["version"] = 99;
  CHECK_THROWS_AS(scenario_from_json(j), Error);
  j = scenario_to_json(*s);
  j["distances"].erase(0);
  CHECK_THROWS_AS(scenario_from_json(j), Error);
}

TEST_CASE("layout and plan files round-trip") {
  const auto gen = generate_scenario(fixtures::tiny_spec(5, 2, 2, 5, 6));
  const std::string text = write_layout(gen.layout);
  CHECK(write_layout(read_layout(text)) == text);

  const auto s = fixtures::make_scenario(fixtures::tiny_spec(5, 2, 2, 5, 6));
  PlanFile file{s->id, "ra", "s", solve_random(s->graph, s->vehicles, 1)};
  const PlanFile back = read_plan_file(write_plan_file(file));
  CHECK(back.scenario_id == file.scenario_id);
  CHECK(back.algo == "ra");
  CHECK(back.plan == file.plan);
  CHECK(layout_path_for("data/scn-1.json") == std::filesystem::path("data/scn-1.layout.json"));
}
