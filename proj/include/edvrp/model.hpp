#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace edvrp {

// Node id used in plans for the depot/terminal selection that closes one
// vehicle's route and opens the next.
inline constexpr int kSeparator = -1;

// Working-line lengths are kept on a dyadic grid so that splitting a line into
// worked and remaining parts and summing them back is exact.
inline constexpr double kLengthQuantum = 0x1.0p-20;
double quantize_length(double meters);

enum class TerminalMode { PerVehicle, SingleDepot };

const char* terminal_mode_name(TerminalMode mode);
TerminalMode parse_terminal_mode(const std::string& text);

// A working line as seen by the task graph: [cos θ, sin θ, l].
struct WorkingLineNode {
  double direction_cos = 1.0;
  double direction_sin = 0.0;
  double length_m = 0.0;
  int plot = -1;         // plot membership, used for clustering labels
  int source_line = -1;  // index of the originating line in a FieldLayout, if any
};

struct VehicleParams {
  double v_w = 1.0;  // working speed, m/s
  double v_f = 2.0;  // idle (transfer) speed, m/s
  double c_w = 0.01;  // working fuel rate, L/s
  double c_f = 0.005;  // idle fuel rate, L/s

  // Throws InvalidSpec unless 0 < v_w <= v_f and 0 < c_f <= c_w.
  void validate() const;

  friend bool operator==(const VehicleParams&, const VehicleParams&) = default;
};

struct Action {
  int node = kSeparator;
  int entrance = 0;

  bool is_separator() const { return node == kSeparator; }

  friend bool operator==(const Action&, const Action&) = default;
  friend auto operator<=>(const Action&, const Action&) = default;
};

using Route = std::vector<Action>;

struct Plan {
  std::vector<Action> actions;

  friend bool operator==(const Plan&, const Plan&) = default;
};

// The task graph G = <N, E>. Working lines occupy node ids [0, L); terminal
// nodes follow. In per-vehicle mode the terminals are M start nodes then M end
// nodes; in single-depot mode a single depot node serves as every start and end.
//
// Distances are stored densely as d[from][to][m_from][m_to]. Terminals have a
// single logical entrance, so both of their entrance slots hold the same value.
class TaskGraph {
 public:
  struct Options {
    // Forced first action per vehicle (used when a vehicle is interrupted
    // mid-line and must finish it before anything else).
    std::vector<std::optional<Action>> forced_first;
    // When set, a vehicle with an empty route still travels start -> end.
    bool empty_route_returns = false;
  };

  TaskGraph() = default;
  TaskGraph(int num_vehicles, TerminalMode mode, std::vector<WorkingLineNode> lines,
            std::vector<double> distances, Options options);
  TaskGraph(int num_vehicles, TerminalMode mode, std::vector<WorkingLineNode> lines,
            std::vector<double> distances)
      : TaskGraph(num_vehicles, mode, std::move(lines), std::move(distances), Options{}) {}

  int num_vehicles() const { return num_vehicles_; }
  int num_lines() const { return static_cast<int>(lines_.size()); }
  int num_terminals() const { return mode_ == TerminalMode::SingleDepot ? 1 : 2 * num_vehicles_; }
  int num_nodes() const { return num_lines() + num_terminals(); }
  TerminalMode mode() const { return mode_; }

  bool is_line(int node) const { return node >= 0 && node < num_lines(); }
  int start_node(int vehicle) const;
  int end_node(int vehicle) const;

  const WorkingLineNode& line(int node) const { return lines_.at(static_cast<std::size_t>(node)); }
  const std::vector<WorkingLineNode>& lines() const { return lines_; }

  // Node feature vector [cos θ, sin θ, l]; zeros for terminals.
  std::array<double, 3> node_features(int node) const;

  // Shortest distance from entrance `from_entrance` of `from` to entrance
  // `to_entrance` of `to`. Unchecked against the edge structure.
  double distance(int from, int to, int from_entrance, int to_entrance) const {
    return distances_[index(from, to, from_entrance, to_entrance)];
  }
  std::array<double, 4> edge(int from, int to) const;

  // Edge structure: start -> line, line <-> line (i != j), line -> end, and
  // start -> end only when empty routes return.
  bool has_edge(int from, int to) const;

  const std::vector<double>& distance_data() const { return distances_; }
  const Options& options() const { return options_; }
  std::optional<Action> forced_first(int vehicle) const;
  // Vehicle owning a forced line, or -1.
  int forced_owner(int line) const;
  bool empty_route_returns() const { return options_.empty_route_returns; }

  friend bool operator==(const TaskGraph& a, const TaskGraph& b);

 private:
  std::size_t index(int from, int to, int mf, int mt) const {
    const auto n = static_cast<std::size_t>(num_nodes());
    return ((static_cast<std::size_t>(from) * n + static_cast<std::size_t>(to)) * 4) +
           static_cast<std::size_t>(mf * 2 + mt);
  }

  int num_vehicles_ = 0;
  TerminalMode mode_ = TerminalMode::SingleDepot;
  std::vector<WorkingLineNode> lines_;
  std::vector<double> distances_;
  Options options_;
  std::vector<int> forced_owner_;
};

// A task graph plus the fleet that operates on it.
struct Scenario {
  std::string id;
  TaskGraph graph;
  std::vector<VehicleParams> vehicles;
};

enum class ViolationKind {
  UnknownNode,
  EntranceOutOfRange,
  DuplicateNode,
  MissingNode,
  SeparatorOverflow,
  SeparatorUnderflow,
  ForcedFirstViolated,
};

const char* violation_kind_name(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  int position = -1;  // index into plan.actions, -1 when not positional
  int node = kSeparator;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool valid() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
  std::string summary() const;
};

ValidationReport validate_plan(const TaskGraph& graph, const Plan& plan);

// Throws InvalidPlan with the report summary when the plan is not valid.
void require_valid_plan(const TaskGraph& graph, const Plan& plan);

// Splits the plan at separators into exactly `num_vehicles` routes; route k
// belongs to vehicle k. Throws InvalidPlan if the separator count is not
// num_vehicles - 1 or any entrance is out of range.
std::vector<Route> split_into_routes(const Plan& plan, int num_vehicles);

// Inverse of split_into_routes.
Plan join_routes(const std::vector<Route>& routes);

}  // namespace edvrp
