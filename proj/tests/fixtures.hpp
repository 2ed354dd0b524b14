#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "edvrp/layout.hpp"
#include "edvrp/model.hpp"
#include "edvrp/scenario.hpp"

namespace fixtures {

using namespace edvrp;

// Task graph with explicitly given distances. `dist(from, to, mf, mt)` is
// only consulted for line entrances; terminal slots are duplicated.
inline TaskGraph explicit_graph(int num_vehicles, TerminalMode mode,
                                const std::vector<double>& lengths,
                                const std::function<double(int, int, int, int)>& dist,
                                TaskGraph::Options options = {}) {
  std::vector<WorkingLineNode> lines;
  for (double l : lengths) lines.push_back({1.0, 0.0, l, 0, -1});
  const int l = static_cast<int>(lengths.size());
  const int n = l + (mode == TerminalMode::SingleDepot ? 1 : 2 * num_vehicles);
  std::vector<double> d(static_cast<std::size_t>(n * n * 4));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int ma = 0; ma < 2; ++ma) {
        for (int mb = 0; mb < 2; ++mb) {
          const int ca = a < l ? ma : 0;
          const int cb = b < l ? mb : 0;
          d[static_cast<std::size_t>(((a * n + b) * 4) + ma * 2 + mb)] = dist(a, b, ca, cb);
        }
      }
    }
  }
  return TaskGraph(num_vehicles, mode, std::move(lines), std::move(d), std::move(options));
}

// One 100 m line whose two ends are each 50 m of road from the depot.
inline FieldLayout single_line_layout() {
  FieldLayout layout;
  auto& r = layout.roads;
  layout.depot_vertex = r.add_vertex({0.0, 0.0});
  const int a = r.add_vertex({0.0, 50.0});
  const int b = r.add_vertex({0.0, 150.0});
  r.add_edge(layout.depot_vertex, a, 50.0);
  r.add_edge(layout.depot_vertex, b, 50.0);
  layout.lines.push_back({0, {0.0, 50.0}, {0.0, 150.0}, a, b, 100.0});
  Plot plot;
  plot.lines = {0};
  layout.plots.push_back(plot);
  return layout;
}

inline std::shared_ptr<Scenario> single_line_scenario() {
  auto s = std::make_shared<Scenario>();
  s->id = "single-line";
  s->graph = derive_task_graph(single_line_layout(), 1, TerminalMode::SingleDepot);
  s->vehicles = {VehicleParams{1.0, 2.0, 0.01, 0.005}};
  return s;
}

// A regular rectangular plot of `n` lines, `spacing` apart and `length` long,
// with the depot joined to the bottom-left corner.
inline FieldLayout regular_plot_layout(int n, double spacing, double length) {
  FieldLayout layout;
  auto& r = layout.roads;
  Plot plot;
  plot.spacing_m = spacing;
  plot.corners = {Point{0.0, 0.0}, Point{n * spacing, 0.0}, Point{n * spacing, length},
                  Point{0.0, length}};
  for (int c = 0; c < 4; ++c) plot.corner_vertices[static_cast<std::size_t>(c)] = r.add_vertex(plot.corners[static_cast<std::size_t>(c)]);
  std::vector<int> bottom{plot.corner_vertices[0]};
  std::vector<int> top{plot.corner_vertices[3]};
  for (int i = 0; i < n; ++i) {
    const double x = spacing * (i + 0.5);
    LayoutLine line{0, {x, 0.0}, {x, length}, -1, -1, quantize_length(length)};
    line.vertex_a = r.add_vertex(line.a);
    line.vertex_b = r.add_vertex(line.b);
    bottom.push_back(line.vertex_a);
    top.push_back(line.vertex_b);
    plot.lines.push_back(i);
    layout.lines.push_back(line);
  }
  bottom.push_back(plot.corner_vertices[1]);
  top.push_back(plot.corner_vertices[2]);
  for (std::size_t i = 0; i + 1 < bottom.size(); ++i) {
    r.add_edge(bottom[i], bottom[i + 1]);
    r.add_edge(top[i], top[i + 1]);
  }
  r.add_edge(plot.corner_vertices[0], plot.corner_vertices[3]);
  r.add_edge(plot.corner_vertices[1], plot.corner_vertices[2]);
  layout.plots.push_back(plot);
  layout.depot_vertex = r.add_vertex({-20.0, -20.0});
  r.add_edge(layout.depot_vertex, plot.corner_vertices[0]);
  return layout;
}

// Small generated scenario: `plots` plots of `lo`..`hi` lines each.
inline ScenarioSpec tiny_spec(std::uint64_t seed, int plots, int vehicles, int lo, int hi,
                              TerminalMode mode = TerminalMode::SingleDepot) {
  ScenarioSpec spec;
  spec.seed = seed;
  spec.num_plots = plots;
  spec.num_vehicles = vehicles;
  spec.min_lines_per_plot = lo;
  spec.max_lines_per_plot = hi;
  spec.mode = mode;
  return spec;
}

inline std::shared_ptr<Scenario> make_scenario(const ScenarioSpec& spec) {
  return std::make_shared<Scenario>(to_scenario(generate_scenario(spec)));
}

}  // namespace fixtures
