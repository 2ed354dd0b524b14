#include "edvrp/model.hpp"

#include <cmath>
#include <sstream>

#include "edvrp/error.hpp"

namespace edvrp {

double quantize_length(double meters) {
  return std::round(meters / kLengthQuantum) * kLengthQuantum;
}

const char* terminal_mode_name(TerminalMode mode) {
  return mode == TerminalMode::SingleDepot ? "single-depot" : "per-vehicle-terminals";
}

TerminalMode parse_terminal_mode(const std::string& text) {
  if (text == "single-depot") return TerminalMode::SingleDepot;
  if (text == "per-vehicle-terminals" || text == "per-vehicle") return TerminalMode::PerVehicle;
  throw Error(ErrorCode::Parse, "unknown terminal mode '" + text + "'");
}

void VehicleParams::validate() const {
  if (!(v_w > 0.0) || !(v_f >= v_w) || !std::isfinite(v_f)) {
    throw Error(ErrorCode::InvalidSpec, "vehicle speeds must satisfy 0 < v_w <= v_f");
  }
  if (!(c_f > 0.0) || !(c_w >= c_f) || !std::isfinite(c_w)) {
    throw Error(ErrorCode::InvalidSpec, "vehicle fuel rates must satisfy 0 < c_f <= c_w");
  }
}

TaskGraph::TaskGraph(int num_vehicles, TerminalMode mode, std::vector<WorkingLineNode> lines,
                     std::vector<double> distances, Options options)
    : num_vehicles_(num_vehicles),
      mode_(mode),
      lines_(std::move(lines)),
      distances_(std::move(distances)),
      options_(std::move(options)) {
  if (num_vehicles_ < 1) throw Error(ErrorCode::InvalidGraph, "task graph needs at least one vehicle");
  const auto n = static_cast<std::size_t>(num_nodes());
  if (distances_.size() != n * n * 4) {
    throw Error(ErrorCode::InvalidGraph, "distance matrix has " + std::to_string(distances_.size()) +
                                             " entries, expected " + std::to_string(n * n * 4));
  }
  for (std::size_t i = 0; i < lines_.size(); ++i) {
    const auto& l = lines_[i];
    const double norm = l.direction_cos * l.direction_cos + l.direction_sin * l.direction_sin;
    if (!(l.length_m > 0.0) || std::abs(norm - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidGraph, "working line " + std::to_string(i) +
                                               " needs a unit direction and positive length");
    }
  }
  for (double d : distances_) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::InvalidGraph, "distances must be finite and non-negative");
    }
  }
  // Terminals have one logical entrance; both slots must agree.
  for (int a = 0; a < num_nodes(); ++a) {
    for (int b = 0; b < num_nodes(); ++b) {
      for (int ma = 0; ma < 2; ++ma) {
        for (int mb = 0; mb < 2; ++mb) {
          const int ca = is_line(a) ? ma : 0;
          const int cb = is_line(b) ? mb : 0;
          if (distance(a, b, ma, mb) != distance(a, b, ca, cb)) {
            throw Error(ErrorCode::InvalidGraph, "terminal entrance slots must be duplicated");
          }
        }
      }
    }
  }
  if (!options_.forced_first.empty() &&
      options_.forced_first.size() != static_cast<std::size_t>(num_vehicles_)) {
    throw Error(ErrorCode::InvalidGraph, "forced_first must have one entry per vehicle");
  }
  forced_owner_.assign(lines_.size(), -1);
  for (std::size_t k = 0; k < options_.forced_first.size(); ++k) {
    const auto& f = options_.forced_first[k];
    if (!f) continue;
    if (!is_line(f->node) || f->entrance < 0 || f->entrance > 1) {
      throw Error(ErrorCode::InvalidGraph, "forced action of vehicle " + std::to_string(k) +
                                               " must name a working line and entrance");
    }
    if (forced_owner_[static_cast<std::size_t>(f->node)] != -1) {
      throw Error(ErrorCode::InvalidGraph, "line forced onto two vehicles");
    }
    forced_owner_[static_cast<std::size_t>(f->node)] = static_cast<int>(k);
  }
}

int TaskGraph::start_node(int vehicle) const {
  return mode_ == TerminalMode::SingleDepot ? num_lines() : num_lines() + vehicle;
}

int TaskGraph::end_node(int vehicle) const {
  return mode_ == TerminalMode::SingleDepot ? num_lines() : num_lines() + num_vehicles_ + vehicle;
}

std::array<double, 3> TaskGraph::node_features(int node) const {
  if (!is_line(node)) return {0.0, 0.0, 0.0};
  const auto& l = line(node);
  return {l.direction_cos, l.direction_sin, l.length_m};
}

std::array<double, 4> TaskGraph::edge(int from, int to) const {
  if (!has_edge(from, to)) {
    throw Error(ErrorCode::MissingEdge,
                "no edge " + std::to_string(from) + " -> " + std::to_string(to));
  }
  return {distance(from, to, 0, 0), distance(from, to, 0, 1), distance(from, to, 1, 0),
          distance(from, to, 1, 1)};
}

bool TaskGraph::has_edge(int from, int to) const {
  const int n = num_nodes();
  if (from < 0 || to < 0 || from >= n || to >= n) return false;
  const bool from_line = is_line(from);
  const bool to_line = is_line(to);
  if (from_line && to_line) return from != to;
  if (mode_ == TerminalMode::SingleDepot) {
    if (from_line != to_line) return true;
    return options_.empty_route_returns;
  }
  const int l = num_lines();
  const bool from_start = !from_line && from < l + num_vehicles_;
  const bool to_end = !to_line && to >= l + num_vehicles_;
  if (from_line) return to_end;
  if (to_line) return from_start;
  return options_.empty_route_returns && from_start && to_end && (to - from) == num_vehicles_;
}

std::optional<Action> TaskGraph::forced_first(int vehicle) const {
  if (options_.forced_first.empty()) return std::nullopt;
  return options_.forced_first.at(static_cast<std::size_t>(vehicle));
}

int TaskGraph::forced_owner(int line) const {
  return is_line(line) ? forced_owner_[static_cast<std::size_t>(line)] : -1;
}

bool operator==(const TaskGraph& a, const TaskGraph& b) {
  auto same_lines = [&] {
    if (a.lines_.size() != b.lines_.size()) return false;
    for (std::size_t i = 0; i < a.lines_.size(); ++i) {
      const auto& x = a.lines_[i];
      const auto& y = b.lines_[i];
      if (x.direction_cos != y.direction_cos || x.direction_sin != y.direction_sin ||
          x.length_m != y.length_m || x.plot != y.plot || x.source_line != y.source_line) {
        return false;
      }
    }
    return true;
  };
  return a.num_vehicles_ == b.num_vehicles_ && a.mode_ == b.mode_ && same_lines() &&
         a.distances_ == b.distances_ && a.options_.forced_first == b.options_.forced_first &&
         a.options_.empty_route_returns == b.options_.empty_route_returns;
}

const char* violation_kind_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::UnknownNode: return "unknown node";
    case ViolationKind::EntranceOutOfRange: return "entrance out of range";
    case ViolationKind::DuplicateNode: return "duplicate node";
    case ViolationKind::MissingNode: return "missing node";
    case ViolationKind::SeparatorOverflow: return "separator overflow";
    case ViolationKind::SeparatorUnderflow: return "separator underflow";
    case ViolationKind::ForcedFirstViolated: return "forced first action violated";
  }
  return "unknown";
}

bool ValidationReport::has(ViolationKind kind) const {
  for (const auto& v : violations) {
    if (v.kind == kind) return true;
  }
  return false;
}

std::string ValidationReport::summary() const {
  if (violations.empty()) return "valid";
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) out << "; ";
    out << violation_kind_name(violations[i].kind);
    if (!violations[i].message.empty()) out << " (" << violations[i].message << ")";
  }
  return out.str();
}

ValidationReport validate_plan(const TaskGraph& graph, const Plan& plan) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, int position, int node, std::string message) {
    report.violations.push_back({kind, position, node, std::move(message)});
  };
  const int m = graph.num_vehicles();
  std::vector<int> seen(static_cast<std::size_t>(graph.num_lines()), -1);
  int separators = 0;
  int vehicle = 0;
  bool route_start = true;
  for (int pos = 0; pos < static_cast<int>(plan.actions.size()); ++pos) {
    const Action a = plan.actions[static_cast<std::size_t>(pos)];
    if (a.is_separator()) {
      ++separators;
      if (separators == m) {
        add(ViolationKind::SeparatorOverflow, pos, a.node,
            "depot selected " + std::to_string(separators) + " times with " + std::to_string(m) +
                " vehicles");
      }
      if (route_start && graph.forced_first(vehicle)) {
        add(ViolationKind::ForcedFirstViolated, pos, a.node,
            "vehicle " + std::to_string(vehicle) + " route is empty");
      }
      ++vehicle;
      route_start = true;
      continue;
    }
    if (!graph.is_line(a.node)) {
      add(ViolationKind::UnknownNode, pos, a.node, "node " + std::to_string(a.node));
      route_start = false;
      continue;
    }
    if (a.entrance != 0 && a.entrance != 1) {
      add(ViolationKind::EntranceOutOfRange, pos, a.node,
          "entrance " + std::to_string(a.entrance));
    }
    auto& first = seen[static_cast<std::size_t>(a.node)];
    if (first >= 0) {
      add(ViolationKind::DuplicateNode, pos, a.node,
          "node " + std::to_string(a.node) + " also at " + std::to_string(first));
    } else {
      first = pos;
    }
    if (vehicle < m) {
      const auto forced = graph.forced_first(vehicle);
      const int owner = graph.forced_owner(a.node);
      if (route_start && forced && *forced != a) {
        add(ViolationKind::ForcedFirstViolated, pos, a.node,
            "vehicle " + std::to_string(vehicle) + " must start with node " +
                std::to_string(forced->node));
      } else if (!route_start && owner >= 0) {
        add(ViolationKind::ForcedFirstViolated, pos, a.node,
            "node " + std::to_string(a.node) + " is reserved as first action of vehicle " +
                std::to_string(owner));
      } else if (route_start && owner >= 0 && owner != vehicle) {
        add(ViolationKind::ForcedFirstViolated, pos, a.node,
            "node " + std::to_string(a.node) + " is reserved for vehicle " + std::to_string(owner));
      }
    }
    route_start = false;
  }
  if (route_start && vehicle < m && graph.forced_first(vehicle)) {
    add(ViolationKind::ForcedFirstViolated, -1, kSeparator,
        "vehicle " + std::to_string(vehicle) + " route is empty");
  }
  if (separators < m - 1) {
    add(ViolationKind::SeparatorUnderflow, -1, kSeparator,
        std::to_string(separators) + " separators, expected " + std::to_string(m - 1));
  }
  for (int node = 0; node < graph.num_lines(); ++node) {
    if (seen[static_cast<std::size_t>(node)] < 0) {
      add(ViolationKind::MissingNode, -1, node, "node " + std::to_string(node));
    }
  }
  return report;
}

void require_valid_plan(const TaskGraph& graph, const Plan& plan) {
  const auto report = validate_plan(graph, plan);
  if (!report.valid()) throw Error(ErrorCode::InvalidPlan, "invalid plan: " + report.summary());
}

std::vector<Route> split_into_routes(const Plan& plan, int num_vehicles) {
  if (num_vehicles < 1) throw Error(ErrorCode::InvalidPlan, "need at least one vehicle");
  std::vector<Route> routes(1);
  for (const Action& a : plan.actions) {
    if (a.is_separator()) {
      routes.emplace_back();
      continue;
    }
    if (a.node < 0 || a.entrance < 0 || a.entrance > 1) {
      throw Error(ErrorCode::InvalidPlan, "malformed action (" + std::to_string(a.node) + ", " +
                                              std::to_string(a.entrance) + ")");
    }
    routes.back().push_back(a);
  }
  if (static_cast<int>(routes.size()) != num_vehicles) {
    throw Error(ErrorCode::InvalidPlan, "plan has " + std::to_string(routes.size() - 1) +
                                            " separators, expected " +
                                            std::to_string(num_vehicles - 1));
  }
  return routes;
}

Plan join_routes(const std::vector<Route>& routes) {
  Plan plan;
  for (std::size_t k = 0; k < routes.size(); ++k) {
    if (k) plan.actions.push_back(Action{kSeparator, 0});
    plan.actions.insert(plan.actions.end(), routes[k].begin(), routes[k].end());
  }
  return plan;
}

}  // namespace edvrp
