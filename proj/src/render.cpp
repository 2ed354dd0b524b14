#include "edvrp/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "edvrp/error.hpp"

namespace edvrp {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

struct Place {
  Point at;
  std::vector<std::pair<int, double>> access;
};

Place vertex_place(const FieldLayout& layout, int v) { return {layout.roads.vertex(v), {{v, 0.0}}}; }

Point line_point(const FieldLayout& layout, int line, int entrance, double progress) {
  const auto& l = layout.lines[static_cast<std::size_t>(line)];
  const Point from = entrance == 0 ? l.a : l.b;
  const Point to = entrance == 0 ? l.b : l.a;
  return lerp(from, to, l.length_m > 0.0 ? progress / l.length_m : 0.0);
}

Place position_place(const FieldLayout& layout, const VehiclePosition& p) {
  switch (p.kind) {
    case PositionKind::AtVertex:
      return vertex_place(layout, p.vertex);
    case PositionKind::OnRoad: {
      const double len = layout.roads.edge_length(p.road.u, p.road.v);
      const Point at = lerp(layout.roads.vertex(p.road.u), layout.roads.vertex(p.road.v),
                            len > 0.0 ? p.road.offset_m / len : 0.0);
      return {at, {{p.road.u, p.road.offset_m}, {p.road.v, len - p.road.offset_m}}};
    }
    case PositionKind::InLine: {
      const auto& l = layout.lines[static_cast<std::size_t>(p.line)];
      return {line_point(layout, p.line, p.entrance, p.progress_m),
              {{layout.line_vertex(p.line, p.entrance), p.progress_m},
               {layout.line_vertex(p.line, 1 - p.entrance), l.length_m - p.progress_m}}};
    }
  }
  return {};
}

void append(std::vector<Point>& out, Point p) {
  if (out.empty() || !(out.back() == p)) out.push_back(p);
}

// Appends the road route between two places (the starting point is assumed
// to be in `out` already).
void append_transfer(const FieldLayout& layout, RoadDistances& road, const Place& from,
                     const Place& to, std::vector<Point>& out) {
  double best = std::numeric_limits<double>::infinity();
  int bu = -1;
  int bv = -1;
  for (const auto& [u, eu] : from.access) {
    for (const auto& [v, ev] : to.access) {
      const double d = road(u, v) + (eu + ev);
      if (d < best) {
        best = d;
        bu = u;
        bv = v;
      }
    }
  }
  append(out, from.at);
  if (bu >= 0) {
    for (int v : layout.roads.shortest_path(bu, bv)) append(out, layout.roads.vertex(v));
  }
  append(out, to.at);
}

int graph_terminal_vertex(const FieldLayout& layout, const TaskGraph& g, int node) {
  if (g.mode() == TerminalMode::SingleDepot) return layout.depot_vertex;
  const int t = node - g.num_lines();
  if (t < g.num_vehicles() && static_cast<std::size_t>(t) < layout.start_vertices.size()) {
    return layout.start_vertices[static_cast<std::size_t>(t)];
  }
  return layout.depot_vertex;
}

struct Bounds {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void add(Point p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
};

std::string points_attr(const std::vector<Point>& pts, double flip) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += num(pts[i].x) + "," + num(flip - pts[i].y);
  }
  return s;
}

std::vector<Point> star(Point c, double r) {
  std::vector<Point> pts;
  const double pi = std::acos(-1.0);
  for (int i = 0; i < 10; ++i) {
    const double a = pi / 2 + i * pi / 5;
    const double rr = i % 2 ? r * 0.45 : r;
    pts.push_back({c.x + rr * std::cos(a), c.y + rr * std::sin(a)});
  }
  return pts;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

const char* vehicle_color(int vehicle) {
  constexpr int n = sizeof kPalette / sizeof kPalette[0];
  return kPalette[((vehicle % n) + n) % n];
}

double polyline_length(const std::vector<Point>& points) {
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) total += distance(points[i - 1], points[i]);
  return total;
}

std::vector<Point> truncate_polyline(const std::vector<Point>& points, double length) {
  std::vector<Point> out;
  if (points.empty()) return out;
  out.push_back(points[0]);
  double covered = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double seg = distance(points[i - 1], points[i]);
    if (covered + seg >= length) {
      if (seg > 0.0) append(out, lerp(points[i - 1], points[i], (length - covered) / seg));
      return out;
    }
    covered += seg;
    out.push_back(points[i]);
  }
  return out;
}

std::vector<std::vector<Point>> plan_trajectories(const FieldLayout& layout, const TaskGraph& graph,
                                                  const Plan& plan) {
  require_valid_plan(graph, plan);
  RoadDistances road(layout.roads);
  const auto routes = split_into_routes(plan, graph.num_vehicles());
  std::vector<std::vector<Point>> out(routes.size());
  for (std::size_t k = 0; k < routes.size(); ++k) {
    const auto& route = routes[k];
    if (route.empty()) continue;
    const int vehicle = static_cast<int>(k);
    Place here = vertex_place(layout, graph_terminal_vertex(layout, graph, graph.start_node(vehicle)));
    for (const Action& a : route) {
      const int id = graph.line(a.node).source_line;
      if (id < 0 || static_cast<std::size_t>(id) >= layout.lines.size()) {
        throw Error(ErrorCode::InvalidPlan, "line " + std::to_string(a.node) + " is not part of the layout");
      }
      append_transfer(layout, road, here, vertex_place(layout, layout.line_vertex(id, a.entrance)), out[k]);
      here = vertex_place(layout, layout.line_vertex(id, 1 - a.entrance));
      append(out[k], here.at);
    }
    append_transfer(layout, road, here,
                    vertex_place(layout, graph_terminal_vertex(layout, graph, graph.end_node(vehicle))), out[k]);
  }
  return out;
}

std::vector<std::vector<Point>> phase2_trajectories(const FieldLayout& layout,
                                                    const Snapshot& snapshot,
                                                    const Rearrangement& r, const Plan& plan) {
  const TaskGraph& g = r.phase2.graph;
  require_valid_plan(g, plan);
  RoadDistances road(layout.roads);
  const auto routes = split_into_routes(plan, g.num_vehicles());
  std::vector<std::vector<Point>> out(routes.size());
  const Place depot = vertex_place(layout, layout.depot_vertex);
  for (std::size_t k = 0; k < routes.size(); ++k) {
    const auto& vs = snapshot.vehicles[static_cast<std::size_t>(r.vehicle_map[k])];
    Place here = position_place(layout, vs.position);
    const bool parked = vs.position.finished && vs.transfer_m == 0.0 && vs.work_m == 0.0;
    if (routes[k].empty() && parked) continue;
    append(out[k], here.at);
    for (const Action& a : routes[k]) {
      const auto& info = r.lines[static_cast<std::size_t>(a.node)];
      const int id = info.source_line;
      Place entry;
      Place exit;
      if (info.remainder) {
        VehiclePosition p;
        p.kind = PositionKind::InLine;
        p.line = id;
        p.entrance = info.entry_entrance;
        p.progress_m = info.progress_m;
        const Place mid = position_place(layout, p);
        const Place end = vertex_place(layout, layout.line_vertex(id, 1 - info.entry_entrance));
        entry = a.entrance == 0 ? mid : end;
        exit = a.entrance == 0 ? end : mid;
      } else {
        entry = vertex_place(layout, layout.line_vertex(id, a.entrance));
        exit = vertex_place(layout, layout.line_vertex(id, 1 - a.entrance));
      }
      if (!(here.at == entry.at)) append_transfer(layout, road, here, entry, out[k]);
      append(out[k], exit.at);
      here = exit;
    }
    append_transfer(layout, road, here, depot, out[k]);
  }
  return out;
}

std::string render_field(const FieldLayout& layout, const FieldDrawing& drawing) {
  Bounds b;
  for (const Point& p : layout.roads.vertices()) b.add(p);
  for (const auto& l : layout.lines) {
    b.add(l.a);
    b.add(l.b);
  }
  for (const auto& plot : layout.plots) {
    for (const Point& c : plot.corners) b.add(c);
  }
  if (!std::isfinite(b.min_x)) b = Bounds{0.0, 0.0, 1.0, 1.0};
  const double w = std::max(b.max_x - b.min_x, 1.0);
  const double h = std::max(b.max_y - b.min_y, 1.0);
  const double margin = 0.05 * std::max(w, h);
  const double flip = b.max_y + b.min_y;  // y' = flip - y mirrors into screen coordinates
  const double vx = b.min_x - margin;
  const double vy = b.min_y - margin;
  const double vw = w + 2 * margin;
  const double vh = h + 2 * margin;
  const double unit = std::max(vw, vh) / 400.0;

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << num(vx) << ' ' << num(vy) << ' '
    << num(vw) << ' ' << num(vh) << "\" width=\"" << num(800.0) << "\" height=\""
    << num(800.0 * vh / vw) << "\">\n";
  if (!drawing.title.empty()) o << "<title>" << escape(drawing.title) << "</title>\n";
  o << "<rect class=\"background\" x=\"" << num(vx) << "\" y=\"" << num(vy) << "\" width=\"" << num(vw)
    << "\" height=\"" << num(vh) << "\" fill=\"white\"/>\n";

  o << "<g id=\"plots\">\n";
  for (const auto& plot : layout.plots) {
    std::vector<Point> corners(plot.corners.begin(), plot.corners.end());
    o << "<polygon class=\"plot\" points=\"" << points_attr(corners, flip)
      << "\" fill=\"#eef6e4\" stroke=\"none\"/>\n";
  }
  o << "</g>\n<g id=\"roads\">\n";
  for (const auto& e : layout.roads.edges()) {
    const Point a = layout.roads.vertex(e.u);
    const Point c = layout.roads.vertex(e.v);
    o << "<line class=\"road\" x1=\"" << num(a.x) << "\" y1=\"" << num(flip - a.y) << "\" x2=\"" << num(c.x)
      << "\" y2=\"" << num(flip - c.y) << "\" stroke=\"#9a9a9a\" stroke-width=\"" << num(unit) << "\"/>\n";
  }
  o << "</g>\n<g id=\"working-lines\">\n";
  for (std::size_t i = 0; i < layout.lines.size(); ++i) {
    const auto& l = layout.lines[i];
    o << "<line class=\"work\" data-line=\"" << i << "\" x1=\"" << num(l.a.x) << "\" y1=\"" << num(flip - l.a.y)
      << "\" x2=\"" << num(l.b.x) << "\" y2=\"" << num(flip - l.b.y) << "\" stroke=\"#4d7f2a\" stroke-width=\""
      << num(unit * 0.6) << "\" stroke-dasharray=\"" << num(unit * 3) << ' ' << num(unit * 2) << "\"/>\n";
  }
  o << "</g>\n<g id=\"entrances\">\n";
  for (const auto& l : layout.lines) {
    for (const Point& p : {l.a, l.b}) {
      o << "<circle class=\"entrance\" cx=\"" << num(p.x) << "\" cy=\"" << num(flip - p.y) << "\" r=\""
        << num(unit * 0.8) << "\" fill=\"#333333\"/>\n";
    }
  }
  o << "</g>\n";

  if (!drawing.phase1.empty()) {
    o << "<g id=\"phase1\">\n";
    for (const auto& pts : drawing.phase1) {
      if (pts.size() < 2) continue;
      o << "<polyline class=\"phase1\" points=\"" << points_attr(pts, flip)
        << "\" fill=\"none\" stroke=\"#b0b0b0\" stroke-width=\"" << num(unit * 1.6) << "\"/>\n";
    }
    o << "</g>\n";
  }
  if (!drawing.routes.empty()) {
    o << "<g id=\"routes\">\n";
    for (std::size_t k = 0; k < drawing.routes.size(); ++k) {
      const auto& pts = drawing.routes[k];
      if (pts.size() < 2) continue;
      const int vehicle = k < drawing.route_vehicles.size() ? drawing.route_vehicles[k] : static_cast<int>(k);
      o << "<polyline class=\"route\" data-vehicle=\"" << vehicle << "\" points=\"" << points_attr(pts, flip)
        << "\" fill=\"none\" stroke=\"" << vehicle_color(vehicle) << "\" stroke-width=\"" << num(unit * 1.2)
        << "\" stroke-linejoin=\"round\"/>\n";
    }
    o << "</g>\n";
  }
  for (const Point& p : drawing.phase2_starts) {
    o << "<polygon class=\"phase2-start\" points=\"" << points_attr(star(p, unit * 5), flip)
      << "\" fill=\"#ffd700\" stroke=\"#333333\" stroke-width=\"" << num(unit * 0.4) << "\"/>\n";
  }
  if (layout.depot_vertex >= 0) {
    const Point d = layout.depot();
    const double s = unit * 6;
    const std::vector<Point> tri{{d.x - s, d.y - s * 0.8}, {d.x + s, d.y - s * 0.8}, {d.x, d.y + s}};
    o << "<polygon class=\"depot\" points=\"" << points_attr(tri, flip) << "\" fill=\"#d62728\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string render_plan(const FieldLayout& layout, const TaskGraph& graph, const Plan& plan,
                        const std::string& title) {
  FieldDrawing d;
  d.title = title;
  d.routes = plan_trajectories(layout, graph, plan);
  return render_field(layout, d);
}

std::string render_dynamic(const FieldLayout& layout, const DynamicOutcome& outcome) {
  FieldDrawing d;
  d.title = outcome.scenario_id + " " + dynamic_task_name(outcome.config.task);
  const auto phase1 = plan_trajectories(layout, outcome.phase1.graph, outcome.phase1_plan);
  for (std::size_t k = 0; k < phase1.size(); ++k) {
    const auto& vs = outcome.snapshot.vehicles[k];
    d.phase1.push_back(truncate_polyline(phase1[k], vs.transfer_m + vs.work_m));
    if (!(vs.position.finished && vs.transfer_m == 0.0)) {
      d.phase2_starts.push_back(position_place(layout, vs.position).at);
    }
  }
  d.routes = phase2_trajectories(layout, outcome.snapshot, outcome.rearrangement, outcome.phase2_plan);
  d.route_vehicles = outcome.rearrangement.vehicle_map;
  return render_field(layout, d);
}

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::vector<ChartSeries>& series) {
  const double width = 640.0;
  const double height = 400.0;
  const double left = 70.0;
  const double right = 20.0;
  const double top = 40.0;
  const double bottom = 50.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  for (const auto& s : series) {
    count = std::max(count, s.values.size());
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto px = [&](std::size_t i) { return left + (count > 1 ? pw * static_cast<double>(i) / static_cast<double>(count - 1) : 0.0); };
  auto py = [&](double v) { return top + ph * (1.0 - (v - lo) / (hi - lo)); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << num(width) << ' ' << num(height)
    << "\" width=\"" << num(width) << "\" height=\"" << num(height) << "\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height) << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape(title)
    << "</text>\n";
  o << "<line class=\"axis\" x1=\"" << num(left) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(left + pw)
    << "\" y2=\"" << num(top + ph) << "\" stroke=\"black\"/>\n";
  o << "<line class=\"axis\" x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left)
    << "\" y2=\"" << num(top + ph) << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
      << num(v) << "</text>\n";
  }
  o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 12)
    << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(x_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::vector<std::string> pts;
    std::string points;
    for (std::size_t i = 0; i < series[k].values.size(); ++i) {
      if (!std::isfinite(series[k].values[i])) continue;
      if (!points.empty()) points += ' ';
      points += num(px(i)) + "," + num(py(series[k].values[i]));
    }
    o << "<polyline class=\"series\" points=\"" << points << "\" fill=\"none\" stroke=\""
      << vehicle_color(static_cast<int>(k)) << "\" stroke-width=\"1.5\"/>\n";
    o << "<text x=\"" << num(left + 10) << "\" y=\"" << num(top + 14 + 14 * static_cast<double>(k))
      << "\" font-size=\"11\" fill=\"" << vehicle_color(static_cast<int>(k)) << "\">" << escape(series[k].name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace edvrp
