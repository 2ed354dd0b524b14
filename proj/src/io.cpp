#include "edvrp/io.hpp"

#include <fstream>
#include <sstream>

#include "edvrp/error.hpp"

namespace edvrp {

namespace {

void expect_format(const Json& j, const char* format) {
  if (!j.is_object() || j.value("format", "") != format) {
    throw Error(ErrorCode::Parse, std::string("expected a '") + format + "' document");
  }
  if (j.value("version", 0) != kScenarioFormatVersion) {
    throw Error(ErrorCode::Parse, std::string("unsupported ") + format + " version");
  }
}

// Top-level keys one per line; the listed array keys one element per line.
std::string write_canonical(const Json& j, std::initializer_list<const char*> row_keys) {
  std::ostringstream out;
  out << "{\n";
  std::size_t i = 0;
  for (const auto& [key, value] : j.items()) {
    out << Json(key).dump() << ": ";
    bool rows = false;
    for (const char* k : row_keys) rows = rows || key == k;
    if (rows && value.is_array() && !value.empty()) {
      out << "[\n";
      for (std::size_t r = 0; r < value.size(); ++r) {
        out << "  " << value[r].dump() << (r + 1 < value.size() ? ",\n" : "\n");
      }
      out << "]";
    } else {
      out << value.dump();
    }
    out << (++i < j.size() ? ",\n" : "\n");
  }
  out << "}\n";
  return out.str();
}

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed JSON: ") + e.what());
  }
}

Json point_json(Point p) { return Json::array({p.x, p.y}); }
Point point_from(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

Json plan_to_json(const Plan& plan) {
  Json actions = Json::array();
  for (const Action& a : plan.actions) actions.push_back(Json::array({a.node, a.entrance}));
  return actions;
}

Plan plan_from_json(const Json& actions) {
  return guarded("plan", [&] {
    Plan plan;
    for (const auto& a : actions) {
      plan.actions.push_back(Action{a.at(0).get<int>(), a.at(1).get<int>()});
    }
    return plan;
  });
}

Json scenario_to_json(const Scenario& scenario) {
  const auto& g = scenario.graph;
  Json j;
  j["format"] = "edvrp-scenario";
  j["version"] = kScenarioFormatVersion;
  j["id"] = scenario.id;
  j["mode"] = terminal_mode_name(g.mode());
  j["M"] = g.num_vehicles();
  j["L"] = g.num_lines();
  j["empty_route_returns"] = g.empty_route_returns();
  Json forced = Json::array();
  for (int k = 0; k < g.num_vehicles(); ++k) {
    const auto f = g.forced_first(k);
    forced.push_back(f ? Json::array({f->node, f->entrance}) : Json(nullptr));
  }
  j["forced_first"] = forced;
  Json nodes = Json::array();
  for (int i = 0; i < g.num_nodes(); ++i) {
    Json node;
    if (g.is_line(i)) {
      const auto& l = g.line(i);
      node["kind"] = "line";
      node["features"] = Json::array({l.direction_cos, l.direction_sin, l.length_m});
      node["plot"] = l.plot;
      node["source_line"] = l.source_line;
    } else if (g.mode() == TerminalMode::SingleDepot) {
      node["kind"] = "depot";
      node["features"] = Json::array({0.0, 0.0, 0.0});
    } else {
      const int t = i - g.num_lines();
      const bool start = t < g.num_vehicles();
      node["kind"] = start ? "start" : "end";
      node["vehicle"] = start ? t : t - g.num_vehicles();
      node["features"] = Json::array({0.0, 0.0, 0.0});
    }
    nodes.push_back(node);
  }
  j["nodes"] = nodes;
  Json vehicles = Json::array();
  for (const auto& v : scenario.vehicles) {
    vehicles.push_back(Json{{"v_w", v.v_w}, {"v_f", v.v_f}, {"c_w", v.c_w}, {"c_f", v.c_f}});
  }
  j["vehicles"] = vehicles;
  Json rows = Json::array();
  for (int a = 0; a < g.num_nodes(); ++a) {
    Json row = Json::array();
    for (int b = 0; b < g.num_nodes(); ++b) {
      row.push_back(Json::array({g.distance(a, b, 0, 0), g.distance(a, b, 0, 1),
                                 g.distance(a, b, 1, 0), g.distance(a, b, 1, 1)}));
    }
    rows.push_back(row);
  }
  j["distances"] = rows;
  return j;
}

Scenario scenario_from_json(const Json& j) {
  expect_format(j, "edvrp-scenario");
  return guarded("scenario", [&] {
    Scenario s;
    s.id = j.at("id").get<std::string>();
    const auto mode = parse_terminal_mode(j.at("mode").get<std::string>());
    const int m = j.at("M").get<int>();
    const int l = j.at("L").get<int>();
    const auto& nodes = j.at("nodes");
    const int terminals = mode == TerminalMode::SingleDepot ? 1 : 2 * m;
    if (m < 1 || l < 0 || static_cast<int>(nodes.size()) != l + terminals) {
      throw Error(ErrorCode::Parse, "scenario node count does not match M and L");
    }
    std::vector<WorkingLineNode> lines;
    for (int i = 0; i < l; ++i) {
      const auto& n = nodes.at(static_cast<std::size_t>(i));
      if (n.at("kind") != "line") throw Error(ErrorCode::Parse, "working lines must come first");
      const auto& f = n.at("features");
      lines.push_back({f.at(0).get<double>(), f.at(1).get<double>(), f.at(2).get<double>(),
                       n.at("plot").get<int>(), n.at("source_line").get<int>()});
    }
    const auto n = static_cast<std::size_t>(l + terminals);
    const auto& rows = j.at("distances");
    if (rows.size() != n) throw Error(ErrorCode::Parse, "distance matrix has wrong row count");
    std::vector<double> dist;
    dist.reserve(n * n * 4);
    for (const auto& row : rows) {
      if (row.size() != n) throw Error(ErrorCode::Parse, "distance matrix has wrong column count");
      for (const auto& cell : row) {
        if (cell.size() != 4) throw Error(ErrorCode::Parse, "each edge needs four distances");
        for (const auto& d : cell) dist.push_back(d.get<double>());
      }
    }
    TaskGraph::Options options;
    options.empty_route_returns = j.value("empty_route_returns", false);
    bool any_forced = false;
    std::vector<std::optional<Action>> forced;
    if (j.contains("forced_first")) {
      for (const auto& f : j.at("forced_first")) {
        if (f.is_null()) {
          forced.emplace_back();
        } else {
          forced.push_back(Action{f.at(0).get<int>(), f.at(1).get<int>()});
          any_forced = true;
        }
      }
    }
    if (any_forced) options.forced_first = std::move(forced);
    s.graph = TaskGraph(m, mode, std::move(lines), std::move(dist), std::move(options));
    for (const auto& v : j.at("vehicles")) {
      VehicleParams p{v.at("v_w").get<double>(), v.at("v_f").get<double>(),
                      v.at("c_w").get<double>(), v.at("c_f").get<double>()};
      p.validate();
      s.vehicles.push_back(p);
    }
    if (static_cast<int>(s.vehicles.size()) != m) {
      throw Error(ErrorCode::Parse, "vehicle count does not match M");
    }
    return s;
  });
}

std::string write_scenario(const Scenario& scenario) {
  return write_canonical(scenario_to_json(scenario), {"nodes", "vehicles", "distances"});
}

Scenario read_scenario(const std::string& text) { return scenario_from_json(parse(text)); }

Json layout_to_json(const FieldLayout& layout) {
  Json j;
  j["format"] = "edvrp-layout";
  j["version"] = kScenarioFormatVersion;
  j["depot"] = layout.depot_vertex;
  j["start_vertices"] = layout.start_vertices;
  Json vertices = Json::array();
  for (const auto& p : layout.roads.vertices()) vertices.push_back(point_json(p));
  j["vertices"] = vertices;
  Json roads = Json::array();
  for (const auto& e : layout.roads.edges()) roads.push_back(Json::array({e.u, e.v, e.length_m}));
  j["roads"] = roads;
  Json plots = Json::array();
  for (const auto& p : layout.plots) {
    Json corners = Json::array();
    for (const auto& c : p.corners) corners.push_back(point_json(c));
    plots.push_back(Json{{"corners", corners},
                         {"corner_vertices", p.corner_vertices},
                         {"lines", p.lines},
                         {"spacing", p.spacing_m}});
  }
  j["plots"] = plots;
  Json lines = Json::array();
  for (const auto& l : layout.lines) {
    lines.push_back(Json{{"plot", l.plot},
                         {"a", point_json(l.a)},
                         {"b", point_json(l.b)},
                         {"va", l.vertex_a},
                         {"vb", l.vertex_b},
                         {"length", l.length_m}});
  }
  j["lines"] = lines;
  return j;
}

FieldLayout layout_from_json(const Json& j) {
  expect_format(j, "edvrp-layout");
  return guarded("layout", [&] {
    FieldLayout layout;
    layout.depot_vertex = j.at("depot").get<int>();
    layout.start_vertices = j.at("start_vertices").get<std::vector<int>>();
    for (const auto& v : j.at("vertices")) layout.roads.add_vertex(point_from(v));
    for (const auto& e : j.at("roads")) {
      layout.roads.add_edge(e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>());
    }
    for (const auto& p : j.at("plots")) {
      Plot plot;
      for (std::size_t c = 0; c < 4; ++c) {
        plot.corners[c] = point_from(p.at("corners").at(c));
        plot.corner_vertices[c] = p.at("corner_vertices").at(c).get<int>();
      }
      plot.lines = p.at("lines").get<std::vector<int>>();
      plot.spacing_m = p.at("spacing").get<double>();
      layout.plots.push_back(std::move(plot));
    }
    for (const auto& l : j.at("lines")) {
      layout.lines.push_back({l.at("plot").get<int>(), point_from(l.at("a")), point_from(l.at("b")),
                              l.at("va").get<int>(), l.at("vb").get<int>(),
                              l.at("length").get<double>()});
    }
    const int nv = layout.roads.num_vertices();
    auto check = [&](int v) {
      if (v < 0 || v >= nv) throw Error(ErrorCode::Parse, "layout references unknown vertex");
    };
    check(layout.depot_vertex);
    for (int v : layout.start_vertices) check(v);
    for (const auto& l : layout.lines) {
      check(l.vertex_a);
      check(l.vertex_b);
    }
    return layout;
  });
}

std::string write_layout(const FieldLayout& layout) {
  return write_canonical(layout_to_json(layout), {"vertices", "roads", "plots", "lines"});
}

FieldLayout read_layout(const std::string& text) { return layout_from_json(parse(text)); }

std::string write_plan_file(const PlanFile& file) {
  Json j;
  j["format"] = "edvrp-plan";
  j["version"] = kScenarioFormatVersion;
  j["scenario_id"] = file.scenario_id;
  j["algo"] = file.algo;
  j["objective"] = file.objective;
  j["actions"] = plan_to_json(file.plan);
  return write_canonical(j, {});
}

PlanFile read_plan_file(const std::string& text) {
  const Json j = parse(text);
  expect_format(j, "edvrp-plan");
  return guarded("plan file", [&] {
    PlanFile f;
    f.scenario_id = j.value("scenario_id", "");
    f.algo = j.value("algo", "");
    f.objective = j.value("objective", "");
    f.plan = plan_from_json(j.at("actions"));
    return f;
  });
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

std::filesystem::path layout_path_for(const std::filesystem::path& scenario_path) {
  auto p = scenario_path;
  p.replace_extension();
  p += ".layout.json";
  return p;
}

}  // namespace edvrp
