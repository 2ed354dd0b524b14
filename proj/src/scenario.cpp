#include "edvrp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "edvrp/error.hpp"

namespace edvrp {

namespace {

constexpr double kCellSize = 320.0;
constexpr double kCenterJitter = 15.0;
constexpr double kMaxHeadlandSlope = 0.2;

struct PlotFrame {
  Point center;
  Point along;   // working-line direction (entrance 0 -> entrance 1)
  Point across;  // line-to-line direction
  double width = 0.0;
  double height = 0.0;
  double bottom_slope = 0.0;
  double top_slope = 0.0;

  Point at(double x, double y) const {
    const double dx = x - width / 2.0;
    return {center.x + dx * across.x + y * along.x, center.y + dx * across.y + y * along.y};
  }
  double bottom(double x) const { return bottom_slope * (x - width / 2.0) - height / 2.0; }
  double top(double x) const { return top_slope * (x - width / 2.0) + height / 2.0; }
};

void build_plot(FieldLayout& layout, int plot_index, const PlotFrame& frame, int num_lines,
                double spacing) {
  auto& roads = layout.roads;
  Plot plot;
  plot.spacing_m = spacing;
  plot.corners = {frame.at(0.0, frame.bottom(0.0)), frame.at(frame.width, frame.bottom(frame.width)),
                  frame.at(frame.width, frame.top(frame.width)), frame.at(0.0, frame.top(0.0))};
  for (int c = 0; c < 4; ++c) plot.corner_vertices[c] = roads.add_vertex(plot.corners[c]);

  std::vector<int> bottom_chain{plot.corner_vertices[0]};
  std::vector<int> top_chain{plot.corner_vertices[3]};
  for (int i = 0; i < num_lines; ++i) {
    const double x = spacing * (i + 0.5);
    LayoutLine line;
    line.plot = plot_index;
    line.a = frame.at(x, frame.bottom(x));
    line.b = frame.at(x, frame.top(x));
    line.vertex_a = roads.add_vertex(line.a);
    line.vertex_b = roads.add_vertex(line.b);
    line.length_m = quantize_length(distance(line.a, line.b));
    bottom_chain.push_back(line.vertex_a);
    top_chain.push_back(line.vertex_b);
    plot.lines.push_back(static_cast<int>(layout.lines.size()));
    layout.lines.push_back(line);
  }
  bottom_chain.push_back(plot.corner_vertices[1]);
  top_chain.push_back(plot.corner_vertices[2]);
  // Headland roads along both ends of the lines, plus the two side roads.
  for (std::size_t i = 0; i + 1 < bottom_chain.size(); ++i) {
    roads.add_edge(bottom_chain[i], bottom_chain[i + 1]);
    roads.add_edge(top_chain[i], top_chain[i + 1]);
  }
  roads.add_edge(plot.corner_vertices[0], plot.corner_vertices[3]);
  roads.add_edge(plot.corner_vertices[1], plot.corner_vertices[2]);
  layout.plots.push_back(std::move(plot));
}

void connect_closest_corners(FieldLayout& layout, const Plot& a, const Plot& b) {
  double best = std::numeric_limits<double>::infinity();
  int bu = -1;
  int bv = -1;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double d = distance(a.corners[i], b.corners[j]);
      if (d < best) {
        best = d;
        bu = a.corner_vertices[i];
        bv = b.corner_vertices[j];
      }
    }
  }
  layout.roads.add_edge(bu, bv);
}

}  // namespace

void ScenarioSpec::validate() const {
  if (num_plots <= 0) throw Error(ErrorCode::InvalidSpec, "num_plots must be positive");
  if (num_vehicles <= 0) throw Error(ErrorCode::InvalidSpec, "num_vehicles must be positive");
  if (min_lines_per_plot < 1 || max_lines_per_plot < min_lines_per_plot) {
    throw Error(ErrorCode::InvalidSpec, "invalid lines-per-plot range");
  }
  if (!(min_spacing_m > 0.0) || max_spacing_m < min_spacing_m) {
    throw Error(ErrorCode::InvalidSpec, "invalid line spacing range");
  }
  if (!(min_line_length_m > 0.0) || max_line_length_m < min_line_length_m) {
    throw Error(ErrorCode::InvalidSpec, "invalid line length range");
  }
  // Headland tilt must never make a line degenerate.
  const double max_width = max_lines_per_plot * max_spacing_m;
  if (jitter && min_line_length_m <= 2.0 * kMaxHeadlandSlope * max_width / 2.0) {
    throw Error(ErrorCode::InvalidSpec, "line length too short for jittered headlands");
  }
  if (max_width > 150.0 || max_line_length_m > 200.0) {
    throw Error(ErrorCode::InvalidSpec, "plots exceed the placement cell");
  }
}

VehicleParams sample_vehicle(Rng& rng) {
  VehicleParams v;
  v.v_w = rng.uniform(1.0, 3.3);
  v.v_f = rng.uniform(std::max(v.v_w, 2.0), 6.94);
  v.c_f = rng.uniform(0.005, 0.008);
  v.c_w = rng.uniform(std::max(v.c_f, 0.007), 0.01);
  return v;
}

GeneratedScenario generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  Rng geometry(derive_seed(spec.seed, 1));
  Rng fleet(derive_seed(spec.seed, 2));
  Rng parking(derive_seed(spec.seed, 3));

  GeneratedScenario out;
  out.id = "scn-" + std::to_string(spec.seed);
  out.mode = spec.mode;
  auto& layout = out.layout;

  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(spec.num_plots))));
  for (int p = 0; p < spec.num_plots; ++p) {
    const int row = p / cols;
    const int col = p % cols;
    PlotFrame frame;
    frame.center = {(col + 0.5) * kCellSize + geometry.uniform(-kCenterJitter, kCenterJitter),
                    (row + 0.5) * kCellSize + geometry.uniform(-kCenterJitter, kCenterJitter)};
    const double theta = geometry.uniform(0.0, std::numbers::pi);
    frame.along = {std::cos(theta), std::sin(theta)};
    frame.across = {-frame.along.y, frame.along.x};
    const int num_lines = static_cast<int>(
        geometry.uniform_int(spec.min_lines_per_plot, spec.max_lines_per_plot));
    const double spacing = geometry.uniform(spec.min_spacing_m, spec.max_spacing_m);
    frame.width = num_lines * spacing;
    frame.height = geometry.uniform(spec.min_line_length_m, spec.max_line_length_m);
    if (spec.jitter) {
      frame.bottom_slope = geometry.uniform(-kMaxHeadlandSlope, kMaxHeadlandSlope);
      frame.top_slope = geometry.uniform(-kMaxHeadlandSlope, kMaxHeadlandSlope);
    }
    build_plot(layout, p, frame, num_lines, spacing);
  }

  // Connector roads between grid neighbours keep the network connected.
  for (int p = 0; p < spec.num_plots; ++p) {
    const int col = p % cols;
    if (col + 1 < cols && p + 1 < spec.num_plots) {
      connect_closest_corners(layout, layout.plots[p], layout.plots[p + 1]);
    }
    if (p + cols < spec.num_plots) {
      connect_closest_corners(layout, layout.plots[p], layout.plots[p + cols]);
    }
  }

  layout.depot_vertex = layout.roads.add_vertex({-60.0, -60.0});
  {
    double best = std::numeric_limits<double>::infinity();
    int target = -1;
    for (const auto& plot : layout.plots) {
      for (int c = 0; c < 4; ++c) {
        const double d = distance(layout.depot(), plot.corners[c]);
        if (d < best) {
          best = d;
          target = plot.corner_vertices[c];
        }
      }
    }
    layout.roads.add_edge(layout.depot_vertex, target);
  }

  if (spec.mode == TerminalMode::PerVehicle) {
    // Vehicles start parked at plot corners and all finish at the depot.
    const auto corners = static_cast<std::int64_t>(layout.plots.size() * 4);
    for (int k = 0; k < spec.num_vehicles; ++k) {
      const auto c = parking.uniform_int(0, corners - 1);
      layout.start_vertices.push_back(
          layout.plots[static_cast<std::size_t>(c / 4)].corner_vertices[static_cast<std::size_t>(c % 4)]);
    }
  }

  for (int k = 0; k < spec.num_vehicles; ++k) out.vehicles.push_back(sample_vehicle(fleet));
  return out;
}

TaskGraph derive_task_graph(const FieldLayout& layout, int num_vehicles, TerminalMode mode,
                            std::span<const int> plots) {
  if (num_vehicles < 1) throw Error(ErrorCode::InvalidSpec, "need at least one vehicle");
  std::vector<int> line_ids;
  for (std::size_t i = 0; i < layout.lines.size(); ++i) {
    const int plot = layout.lines[i].plot;
    if (plots.empty() || std::find(plots.begin(), plots.end(), plot) != plots.end()) {
      line_ids.push_back(static_cast<int>(i));
    }
  }

  // Road vertex of every node slot: lines use both entrances, terminals one.
  std::vector<std::array<int, 2>> anchors;
  std::vector<WorkingLineNode> nodes;
  for (int id : line_ids) {
    const auto& l = layout.lines[static_cast<std::size_t>(id)];
    anchors.push_back({l.vertex_a, l.vertex_b});
    WorkingLineNode node;
    const double len = distance(l.a, l.b);
    node.direction_cos = (l.b.x - l.a.x) / len;
    node.direction_sin = (l.b.y - l.a.y) / len;
    // Renormalize so cos^2 + sin^2 = 1 holds to rounding.
    const double norm = std::hypot(node.direction_cos, node.direction_sin);
    node.direction_cos /= norm;
    node.direction_sin /= norm;
    node.length_m = l.length_m;
    node.plot = l.plot;
    node.source_line = id;
    nodes.push_back(node);
  }
  if (mode == TerminalMode::SingleDepot) {
    anchors.push_back({layout.depot_vertex, layout.depot_vertex});
  } else {
    for (int k = 0; k < num_vehicles; ++k) {
      const int v = static_cast<std::size_t>(k) < layout.start_vertices.size()
                        ? layout.start_vertices[static_cast<std::size_t>(k)]
                        : layout.depot_vertex;
      anchors.push_back({v, v});
    }
    for (int k = 0; k < num_vehicles; ++k) {
      anchors.push_back({layout.depot_vertex, layout.depot_vertex});
    }
  }

  const auto reach = layout.roads.reachable_from(layout.depot_vertex);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    for (int e = 0; e < 2; ++e) {
      if (!reach[static_cast<std::size_t>(anchors[i][e])]) {
        const bool is_line = i < line_ids.size();
        throw Error(ErrorCode::DisconnectedRoads,
                    is_line ? "entrance " + std::to_string(e) + " of line " +
                                  std::to_string(line_ids[i]) + " (road vertex " +
                                  std::to_string(anchors[i][e]) + ") is unreachable"
                            : "terminal at road vertex " + std::to_string(anchors[i][e]) +
                                  " is unreachable");
      }
    }
  }

  const std::size_t n = anchors.size();
  std::vector<double> dist(n * n * 4, 0.0);
  RoadDistances road(layout.roads);
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < 2; ++a) {
      for (std::size_t j = 0; j < n; ++j) {
        for (int b = 0; b < 2; ++b) {
          dist[((i * n + j) * 4) + static_cast<std::size_t>(a * 2 + b)] =
              road(anchors[i][a], anchors[j][b]);
        }
      }
    }
  }
  return TaskGraph(num_vehicles, mode, std::move(nodes), std::move(dist));
}

Scenario to_scenario(const GeneratedScenario& generated, std::span<const int> plots) {
  Scenario s;
  s.id = generated.id;
  s.vehicles = generated.vehicles;
  s.graph = derive_task_graph(generated.layout, static_cast<int>(generated.vehicles.size()),
                              generated.mode, plots);
  return s;
}

}  // namespace edvrp
