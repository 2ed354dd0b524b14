#include "edvrp/dynamic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "edvrp/error.hpp"

namespace edvrp {

namespace {

int terminal_vertex(const FieldLayout& layout, const TaskGraph& g, int node) {
  if (g.mode() == TerminalMode::SingleDepot) return layout.depot_vertex;
  const int t = node - g.num_lines();
  if (t < g.num_vehicles() && static_cast<std::size_t>(t) < layout.start_vertices.size()) {
    return layout.start_vertices[static_cast<std::size_t>(t)];
  }
  return layout.depot_vertex;
}

int source_of(const TaskGraph& g, int node) {
  const int id = g.line(node).source_line;
  if (id < 0) throw Error(ErrorCode::InvalidGraph, "line " + std::to_string(node) + " has no layout line");
  return id;
}

// Places a vehicle `s` meters along the shortest road path from -> to.
VehiclePosition along_path(const RoadGraph& roads, int from, int to, double s) {
  VehiclePosition pos;
  if (s <= 0.0 || from == to) {
    pos.vertex = from;
    return pos;
  }
  const auto path = roads.shortest_path(from, to);
  double covered = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const double len = roads.edge_length(path[i], path[i + 1]);
    if (s < covered + len) {
      pos.kind = PositionKind::OnRoad;
      pos.road = {path[i], path[i + 1], s - covered};
      return pos;
    }
    covered += len;
  }
  pos.vertex = to;
  return pos;
}

// A point of the phase-2 graph, reachable through one or two road vertices at
// an extra cost each. Points sharing a non-negative identity coincide.
struct Anchor {
  std::vector<std::pair<int, double>> access;
  int identity = -1;
};

Anchor vertex_anchor(int v) { return Anchor{{{v, 0.0}}, -1}; }

double anchor_distance(RoadDistances& road, const Anchor& a, const Anchor& b) {
  if (a.identity >= 0 && a.identity == b.identity) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [u, eu] : a.access) {
    for (const auto& [v, ev] : b.access) best = std::min(best, road(u, v) + (eu + ev));
  }
  return best;
}

struct LineGeometry {
  double cos = 1.0;
  double sin = 0.0;
};

LineGeometry direction(const LayoutLine& l, bool reversed) {
  const double len = distance(l.a, l.b);
  LineGeometry g{(l.b.x - l.a.x) / len, (l.b.y - l.a.y) / len};
  const double norm = std::hypot(g.cos, g.sin);
  g.cos /= norm;
  g.sin /= norm;
  if (reversed) {
    g.cos = -g.cos;
    g.sin = -g.sin;
  }
  return g;
}

Anchor position_anchor(const FieldLayout& layout, const VehiclePosition& p, int identity) {
  switch (p.kind) {
    case PositionKind::AtVertex:
      return vertex_anchor(p.vertex);
    case PositionKind::OnRoad: {
      const double len = layout.roads.edge_length(p.road.u, p.road.v);
      return Anchor{{{p.road.u, p.road.offset_m}, {p.road.v, len - p.road.offset_m}}, -1};
    }
    case PositionKind::InLine: {
      const auto& l = layout.lines[static_cast<std::size_t>(p.line)];
      const int entry = layout.line_vertex(p.line, p.entrance);
      const int exit = layout.line_vertex(p.line, 1 - p.entrance);
      return Anchor{{{entry, p.progress_m}, {exit, l.length_m - p.progress_m}}, identity};
    }
  }
  return {};
}

struct Builder {
  const FieldLayout& layout;
  std::span<const VehicleParams> vehicles;
  const Snapshot& snapshot;
  FuelConvention convention;
  RoadDistances road;

  Builder(const FieldLayout& l, std::span<const VehicleParams> v, const Snapshot& s, FuelConvention c)
      : layout(l), vehicles(v), snapshot(s), convention(c), road(l.roads) {}

  // `full`: untouched layout lines. `free_remainders`: vehicles whose
  // in-line remainder is left to anyone. Remaining vehicles inside a line get
  // their remainder as a forced first action.
  Rearrangement build(const std::vector<int>& keep, const std::vector<int>& full,
                      const std::vector<int>& free_remainders) {
    Rearrangement r;
    r.vehicle_map = keep;
    std::vector<Anchor> anchors;  // two per line
    std::vector<WorkingLineNode> nodes;
    std::vector<std::optional<Action>> forced(keep.size());

    auto add_full = [&](int id) {
      const auto& l = layout.lines[static_cast<std::size_t>(id)];
      const auto dir = direction(l, false);
      nodes.push_back({dir.cos, dir.sin, l.length_m, l.plot, id});
      anchors.push_back(vertex_anchor(l.vertex_a));
      anchors.push_back(vertex_anchor(l.vertex_b));
      r.lines.push_back({id, false, 0, 0.0});
    };
    auto add_remainder = [&](int vehicle) {
      const auto& p = snapshot.vehicles[static_cast<std::size_t>(vehicle)].position;
      const auto& l = layout.lines[static_cast<std::size_t>(p.line)];
      const auto dir = direction(l, p.entrance == 1);
      nodes.push_back({dir.cos, dir.sin, l.length_m - p.progress_m, l.plot, p.line});
      anchors.push_back(position_anchor(layout, p, vehicle));
      anchors.push_back(vertex_anchor(layout.line_vertex(p.line, 1 - p.entrance)));
      r.lines.push_back({p.line, true, p.entrance, p.progress_m});
    };

    for (std::size_t k = 0; k < keep.size(); ++k) {
      const auto& p = snapshot.vehicles[static_cast<std::size_t>(keep[k])].position;
      if (p.kind == PositionKind::InLine) {
        forced[k] = Action{static_cast<int>(nodes.size()), 0};
        add_remainder(keep[k]);
      }
    }
    for (int v : free_remainders) add_remainder(v);
    for (int id : full) add_full(id);

    const int l = static_cast<int>(nodes.size());
    const int m = static_cast<int>(keep.size());
    std::vector<Anchor> slots;  // one anchor per (node, entrance)
    for (const auto& a : anchors) slots.push_back(a);
    for (int k = 0; k < m; ++k) {
      const auto& p = snapshot.vehicles[static_cast<std::size_t>(keep[static_cast<std::size_t>(k)])].position;
      const Anchor a = position_anchor(layout, p, keep[static_cast<std::size_t>(k)]);
      slots.push_back(a);
      slots.push_back(a);
    }
    for (int k = 0; k < m; ++k) {
      slots.push_back(vertex_anchor(layout.depot_vertex));
      slots.push_back(vertex_anchor(layout.depot_vertex));
    }
    const int n = l + 2 * m;
    std::vector<double> dist(static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * 4);
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < 2; ++a) {
        for (int j = 0; j < n; ++j) {
          for (int b = 0; b < 2; ++b) {
            dist[static_cast<std::size_t>(((i * n + j) * 4) + a * 2 + b)] =
                anchor_distance(road, slots[static_cast<std::size_t>(2 * i + a)],
                                slots[static_cast<std::size_t>(2 * j + b)]);
          }
        }
      }
    }
    // A vehicle that never left its parking spot may stay there.
    for (int k = 0; k < m; ++k) {
      const auto& vs = snapshot.vehicles[static_cast<std::size_t>(keep[static_cast<std::size_t>(k)])];
      if (!vs.position.finished || vs.transfer_m != 0.0 || vs.work_m != 0.0) continue;
      const auto base = static_cast<std::size_t>(((l + k) * n + (l + m + k)) * 4);
      std::fill_n(dist.begin() + static_cast<std::ptrdiff_t>(base), 4, 0.0);
    }
    TaskGraph::Options options;
    options.forced_first = std::move(forced);
    options.empty_route_returns = true;
    r.phase2.graph = TaskGraph(m, TerminalMode::PerVehicle, std::move(nodes), std::move(dist), options);
    for (int k : keep) r.phase2.vehicles.push_back(vehicles[static_cast<std::size_t>(k)]);
    return r;
  }

  ReturnLeg return_leg(int vehicle, bool finish_line) {
    const auto& p = snapshot.vehicles[static_cast<std::size_t>(vehicle)].position;
    ReturnLeg leg;
    leg.vehicle = vehicle;
    const Anchor depot = vertex_anchor(layout.depot_vertex);
    if (p.kind == PositionKind::InLine && finish_line) {
      const auto& l = layout.lines[static_cast<std::size_t>(p.line)];
      leg.work_m = l.length_m - p.progress_m;
      leg.transfer_m = road(layout.line_vertex(p.line, 1 - p.entrance), layout.depot_vertex);
    } else {
      leg.transfer_m = anchor_distance(road, position_anchor(layout, p, -1), depot);
    }
    const auto& params = vehicles[static_cast<std::size_t>(vehicle)];
    leg.time_s = tally_time(leg.transfer_m, leg.work_m, params);
    leg.fuel_L = tally_fuel(leg.transfer_m, leg.work_m, params, convention);
    return leg;
  }

  // Phase-1 lines nobody has touched yet.
  std::vector<int> untouched(std::span<const int> phase1_lines) const {
    std::set<int> busy(snapshot.completed_lines.begin(), snapshot.completed_lines.end());
    for (const auto& v : snapshot.vehicles) {
      if (v.position.kind == PositionKind::InLine) busy.insert(v.position.line);
    }
    std::vector<int> out;
    for (int id : phase1_lines) {
      if (busy.count(id) == 0) out.push_back(id);
    }
    return out;
  }
};

}  // namespace

Snapshot take_snapshot(const FieldLayout& layout, const TaskGraph& graph,
                       std::span<const VehicleParams> vehicles, const Plan& plan, double fraction,
                       FuelConvention convention) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "snapshot fraction must be in (0, 1]");
  }
  const ObjectiveVector full = evaluate_plan(graph, vehicles, plan, convention);
  const auto routes = split_into_routes(plan, graph.num_vehicles());
  Snapshot snap;
  snap.fraction = fraction;
  snap.time_s = fraction * full.makespan_s;
  std::set<int> completed;

  for (int k = 0; k < graph.num_vehicles(); ++k) {
    const auto& params = vehicles[static_cast<std::size_t>(k)];
    const auto& route = routes[static_cast<std::size_t>(k)];
    const auto& tally = full.per_vehicle[static_cast<std::size_t>(k)];
    VehicleSnapshot vs;
    const int start_vertex = terminal_vertex(layout, graph, graph.start_node(k));
    const int end_vertex = terminal_vertex(layout, graph, graph.end_node(k));

    if (route.empty() || tally.time_s <= snap.time_s) {
      // Done (or never left): everything in the tally is consumed.
      vs.transfer_m = tally.transfer_m;
      vs.work_m = tally.work_m;
      vs.time_s = tally.time_s;
      vs.fuel_L = tally.fuel_L;
      vs.actions_started = static_cast<int>(route.size());
      vs.lines_completed = static_cast<int>(route.size());
      vs.position.vertex = route.empty() ? start_vertex : end_vertex;
      vs.position.finished = true;
      for (const Action& a : route) completed.insert(source_of(graph, a.node));
      snap.vehicles.push_back(vs);
      continue;
    }

    double remaining = snap.time_s;
    int node = graph.start_node(k);
    int exit = 0;
    int vertex = start_vertex;
    bool stopped = false;
    for (std::size_t i = 0; i <= route.size() && !stopped; ++i) {
      const bool to_end = i == route.size();
      const int target = to_end ? graph.end_node(k) : route[i].node;
      const int entrance = to_end ? 0 : route[i].entrance;
      const int target_vertex =
          to_end ? end_vertex : layout.line_vertex(source_of(graph, target), entrance);
      const double d = graph.distance(node, target, exit, entrance);
      const double drive = d / params.v_f;
      if (remaining < drive) {
        const double s = remaining * params.v_f;
        vs.transfer_m += s;
        vs.position = along_path(layout.roads, vertex, target_vertex, s);
        stopped = true;
        break;
      }
      vs.transfer_m += d;
      remaining -= drive;
      if (to_end) break;
      const int id = source_of(graph, target);
      const double len = graph.line(target).length_m;
      const double work = len / params.v_w;
      if (remaining < work) {
        // Round down so the vehicle never gets ahead of the clock.
        const double p = std::min(std::floor(remaining * params.v_w / kLengthQuantum) * kLengthQuantum, len);
        if (p < len) {
          vs.work_m += p;
          vs.position.kind = PositionKind::InLine;
          vs.position.line = id;
          vs.position.entrance = entrance;
          vs.position.progress_m = p;
          vs.actions_started = static_cast<int>(i) + 1;
          stopped = true;
          break;
        }
        remaining = 0.0;
      } else {
        remaining -= work;
      }
      vs.work_m += len;
      completed.insert(id);
      ++vs.lines_completed;
      vs.actions_started = vs.lines_completed;
      node = target;
      exit = 1 - entrance;
      vertex = layout.line_vertex(id, 1 - entrance);
    }
    if (!stopped) {
      vs.position.vertex = end_vertex;
      vs.position.finished = true;
    }
    vs.time_s = tally_time(vs.transfer_m, vs.work_m, params);
    vs.fuel_L = tally_fuel(vs.transfer_m, vs.work_m, params, convention);
    snap.vehicles.push_back(vs);
  }
  snap.completed_lines.assign(completed.begin(), completed.end());
  return snap;
}

Rearrangement rearrange_field_increase(const FieldLayout& layout,
                                       std::span<const VehicleParams> vehicles,
                                       const Snapshot& snapshot, std::span<const int> phase1_lines,
                                       std::span<const int> new_plots, FuelConvention convention) {
  Builder b(layout, vehicles, snapshot, convention);
  std::vector<int> full = b.untouched(phase1_lines);
  const std::set<int> known(phase1_lines.begin(), phase1_lines.end());
  for (int plot : new_plots) {
    if (plot < 0 || static_cast<std::size_t>(plot) >= layout.plots.size()) {
      throw Error(ErrorCode::InvalidSpec, "unknown plot " + std::to_string(plot));
    }
    for (int id : layout.plots[static_cast<std::size_t>(plot)].lines) {
      if (known.count(id) != 0) {
        throw Error(ErrorCode::InvalidSpec, "plot " + std::to_string(plot) + " is already part of phase 1");
      }
      full.push_back(id);
    }
  }
  std::vector<int> keep(vehicles.size());
  for (std::size_t k = 0; k < keep.size(); ++k) keep[k] = static_cast<int>(k);
  return b.build(keep, full, {});
}

Rearrangement rearrange_vehicle_decrease(const FieldLayout& layout,
                                         std::span<const VehicleParams> vehicles,
                                         const Snapshot& snapshot,
                                         std::span<const int> phase1_lines,
                                         std::span<const int> removed, bool finish_line,
                                         FuelConvention convention) {
  const int m = static_cast<int>(vehicles.size());
  std::set<int> gone;
  for (int k : removed) {
    if (k < 0 || k >= m) throw Error(ErrorCode::InvalidSpec, "unknown vehicle " + std::to_string(k));
    gone.insert(k);
  }
  if (static_cast<int>(gone.size()) >= m) {
    throw Error(ErrorCode::InvalidSpec, "at least one vehicle must remain");
  }
  Builder b(layout, vehicles, snapshot, convention);
  std::vector<int> keep;
  std::vector<int> free_remainders;
  std::vector<ReturnLeg> returns;
  for (int k = 0; k < m; ++k) {
    if (gone.count(k) == 0) {
      keep.push_back(k);
      continue;
    }
    returns.push_back(b.return_leg(k, finish_line));
    if (!finish_line && snapshot.vehicles[static_cast<std::size_t>(k)].position.kind == PositionKind::InLine) {
      free_remainders.push_back(k);
    }
  }
  Rearrangement r = b.build(keep, b.untouched(phase1_lines), free_remainders);
  r.returns = std::move(returns);
  return r;
}

Plan continue_phase1(const TaskGraph& phase1_graph, const Plan& phase1_plan,
                     const Snapshot& snapshot, const Rearrangement& r) {
  const auto routes = split_into_routes(phase1_plan, phase1_graph.num_vehicles());
  const TaskGraph& g = r.phase2.graph;
  std::map<int, int> full_node;  // layout line -> phase-2 node
  for (std::size_t i = 0; i < r.lines.size(); ++i) {
    if (!r.lines[i].remainder) full_node[r.lines[i].source_line] = static_cast<int>(i);
  }
  std::vector<bool> used(r.lines.size(), false);
  std::vector<Route> out(r.vehicle_map.size());
  for (std::size_t k2 = 0; k2 < r.vehicle_map.size(); ++k2) {
    const int k = r.vehicle_map[k2];
    if (auto f = g.forced_first(static_cast<int>(k2))) {
      out[k2].push_back(*f);
      used[static_cast<std::size_t>(f->node)] = true;
    }
    const auto& route = routes[static_cast<std::size_t>(k)];
    const auto& vs = snapshot.vehicles[static_cast<std::size_t>(k)];
    for (std::size_t i = static_cast<std::size_t>(vs.actions_started); i < route.size(); ++i) {
      const int id = phase1_graph.line(route[i].node).source_line;
      auto it = full_node.find(id);
      if (it == full_node.end() || used[static_cast<std::size_t>(it->second)]) continue;
      out[k2].push_back({it->second, route[i].entrance});
      used[static_cast<std::size_t>(it->second)] = true;
    }
  }
  // Work phase 1 never assigned (new plots, removed vehicles' lines) goes to
  // the last vehicle.
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (!used[i] && !out.empty()) out.back().push_back({static_cast<int>(i), 0});
  }
  return join_routes(out);
}

DynamicTask parse_dynamic_task(const std::string& text) {
  if (text == "field-increase") return DynamicTask::FieldIncrease;
  if (text == "vehicle-decrease") return DynamicTask::VehicleDecrease;
  throw Error(ErrorCode::InvalidSpec, "unknown dynamic task '" + text + "'");
}

const char* dynamic_task_name(DynamicTask task) {
  return task == DynamicTask::FieldIncrease ? "field-increase" : "vehicle-decrease";
}

DynamicTotals combine_totals(std::span<const VehicleParams> vehicles, const Snapshot& snapshot,
                             const Rearrangement& r, const ObjectiveVector& phase2) {
  DynamicTotals t;
  t.per_vehicle.resize(vehicles.size());
  for (std::size_t k = 0; k < vehicles.size(); ++k) {
    const auto& vs = snapshot.vehicles[k];
    auto& v = t.per_vehicle[k];
    v.transfer_m = vs.transfer_m;
    v.work_m = vs.work_m;
    v.time_s = vs.time_s;
    v.fuel_L = vs.fuel_L;
    v.lines = vs.lines_completed;
  }
  for (const auto& leg : r.returns) {
    auto& v = t.per_vehicle[static_cast<std::size_t>(leg.vehicle)];
    v.transfer_m += leg.transfer_m;
    v.work_m += leg.work_m;
    v.time_s += leg.time_s;
    v.fuel_L += leg.fuel_L;
    if (leg.work_m > 0.0) ++v.lines;
  }
  for (std::size_t k2 = 0; k2 < r.vehicle_map.size() && k2 < phase2.per_vehicle.size(); ++k2) {
    const auto& p = phase2.per_vehicle[k2];
    auto& v = t.per_vehicle[static_cast<std::size_t>(r.vehicle_map[k2])];
    v.transfer_m += p.transfer_m;
    v.work_m += p.work_m;
    v.time_s += p.time_s;
    v.fuel_L += p.fuel_L;
    v.lines += p.lines;
  }
  for (const auto& v : t.per_vehicle) {
    t.distance_m += v.transfer_m;
    t.worked_m += v.work_m;
    t.fuel_L += v.fuel_L;
    t.time_s = std::max(t.time_s, v.time_s);
  }
  return t;
}

DynamicOutcome run_dynamic(const GeneratedScenario& scenario, const DynamicConfig& config,
                           const PlanSolver& phase1_solver, const PlanSolver& phase2_solver) {
  const FieldLayout& layout = scenario.layout;
  const int plots = static_cast<int>(layout.plots.size());
  const int m = static_cast<int>(scenario.vehicles.size());
  DynamicOutcome out;
  out.config = config;
  out.scenario_id = scenario.id;

  std::vector<int> initial;
  std::vector<int> added;
  if (config.task == DynamicTask::FieldIncrease) {
    initial = config.initial_plots;
    if (initial.empty()) {
      for (int p = 0; p < (plots + 1) / 2; ++p) initial.push_back(p);
    }
    for (int p = 0; p < plots; ++p) {
      if (std::find(initial.begin(), initial.end(), p) == initial.end()) added.push_back(p);
    }
  } else {
    for (int p = 0; p < plots; ++p) initial.push_back(p);
  }

  out.phase1.id = scenario.id;
  out.phase1.vehicles = scenario.vehicles;
  out.phase1.graph = derive_task_graph(layout, m, scenario.mode, initial);
  out.phase1_plan = phase1_solver(PlanRequest{out.phase1, config.objective});
  out.phase1_objectives =
      evaluate_plan(out.phase1.graph, out.phase1.vehicles, out.phase1_plan, config.fuel_convention);
  for (int i = 0; i < out.phase1.graph.num_lines(); ++i) {
    out.phase1_lines.push_back(out.phase1.graph.line(i).source_line);
  }
  out.snapshot = take_snapshot(layout, out.phase1.graph, out.phase1.vehicles, out.phase1_plan,
                               config.fraction, config.fuel_convention);

  if (config.task == DynamicTask::FieldIncrease) {
    out.rearrangement = rearrange_field_increase(layout, scenario.vehicles, out.snapshot,
                                                 out.phase1_lines, added, config.fuel_convention);
  } else {
    std::vector<int> removed = config.removed;
    if (removed.empty()) removed.push_back(m - 1);
    out.rearrangement =
        rearrange_vehicle_decrease(layout, scenario.vehicles, out.snapshot, out.phase1_lines,
                                   removed, config.finish_line, config.fuel_convention);
  }
  out.rearrangement.phase2.id = scenario.id + "-phase2";

  const Scenario& p2 = out.rearrangement.phase2;
  if (p2.graph.num_lines() == 0) {
    out.phase2_plan.actions.assign(static_cast<std::size_t>(p2.graph.num_vehicles() - 1),
                                   Action{kSeparator, 0});
  } else {
    PlanRequest req{p2, config.objective};
    req.phase1 = &out.phase1;
    req.phase1_plan = &out.phase1_plan;
    req.snapshot = &out.snapshot;
    req.rearrangement = &out.rearrangement;
    out.phase2_plan = phase2_solver(req);
  }
  out.phase2_objectives = evaluate_plan(p2.graph, p2.vehicles, out.phase2_plan, config.fuel_convention);
  out.totals = combine_totals(scenario.vehicles, out.snapshot, out.rearrangement, out.phase2_objectives);
  for (const auto& l : layout.lines) out.line_total_m += l.length_m;
  return out;
}

}  // namespace edvrp
