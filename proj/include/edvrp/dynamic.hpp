#pragma once

// Mid-operation re-planning: run a phase-1 plan up to a fraction of its
// makespan, freeze every vehicle where it is, then plan the remaining work
// (plus any new plots) from those positions.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "edvrp/layout.hpp"
#include "edvrp/model.hpp"
#include "edvrp/objectives.hpp"
#include "edvrp/scenario.hpp"

namespace edvrp {

enum class PositionKind { AtVertex, OnRoad, InLine };

struct VehiclePosition {
  PositionKind kind = PositionKind::AtVertex;
  int vertex = -1;     // AtVertex
  EdgePoint road;      // OnRoad; offset measured from road.u
  int line = -1;       // InLine: layout line id
  int entrance = 0;    // InLine: entrance the line was entered by
  double progress_m = 0.0;  // InLine: quantized distance worked so far
  bool finished = false;    // phase-1 route fully driven
};

struct VehicleSnapshot {
  VehiclePosition position;
  double transfer_m = 0.0;  // consumed in phase 1
  double work_m = 0.0;
  double time_s = 0.0;  // transfer_m / v_f + work_m / v_w
  double fuel_L = 0.0;
  // Route actions completed (plus the one in progress, for InLine).
  int actions_started = 0;
  int lines_completed = 0;
};

struct Snapshot {
  double fraction = 0.0;
  double time_s = 0.0;  // fraction x phase-1 makespan
  std::vector<VehicleSnapshot> vehicles;
  std::vector<int> completed_lines;  // layout line ids, ascending
};

// Drives a phase-1 plan kinematically along road shortest paths (v_f) and
// working lines (v_w) until fraction x makespan. `graph` must have been
// derived from `layout` in per-vehicle or single-depot mode.
Snapshot take_snapshot(const FieldLayout& layout, const TaskGraph& graph,
                       std::span<const VehicleParams> vehicles, const Plan& plan, double fraction,
                       FuelConvention convention = FuelConvention::RateTime);

// One working line of the phase-2 graph.
struct Phase2Line {
  int source_line = -1;  // layout line id
  bool remainder = false;
  // Remainders: entrance 0 is the in-line position, entrance 1 the line end
  // being worked towards.
  int entry_entrance = 0;
  double progress_m = 0.0;
};

// A removed vehicle's way home, charged to the final totals.
struct ReturnLeg {
  int vehicle = -1;
  double transfer_m = 0.0;
  double work_m = 0.0;  // > 0 only when it finishes its current line first
  double time_s = 0.0;
  double fuel_L = 0.0;
};

struct Rearrangement {
  Scenario phase2;  // per-vehicle terminals: positions -> depot
  std::vector<int> vehicle_map;  // phase-2 vehicle -> original vehicle
  std::vector<Phase2Line> lines;
  std::vector<ReturnLeg> returns;
};

// Phase-2 problem for the field-increase task: every unfinished line (the
// remainder of a partially worked one becomes the forced first action of the
// vehicle working it) plus all lines of `new_plots`.
Rearrangement rearrange_field_increase(const FieldLayout& layout,
                                       std::span<const VehicleParams> vehicles,
                                       const Snapshot& snapshot, std::span<const int> phase1_lines,
                                       std::span<const int> new_plots,
                                       FuelConvention convention = FuelConvention::RateTime);

// Phase-2 problem for the vehicle-decrease task. Removed vehicles drive to the
// depot; with `finish_line` a removed vehicle inside a line completes it
// first, otherwise it leaves the remainder for the others.
Rearrangement rearrange_vehicle_decrease(const FieldLayout& layout,
                                         std::span<const VehicleParams> vehicles,
                                         const Snapshot& snapshot,
                                         std::span<const int> phase1_lines,
                                         std::span<const int> removed, bool finish_line = true,
                                         FuelConvention convention = FuelConvention::RateTime);

// Phase-2 plan that keeps driving the phase-1 routes: each remaining vehicle
// does its remainder (if any), then its untouched phase-1 lines in order.
Plan continue_phase1(const TaskGraph& phase1_graph, const Plan& phase1_plan,
                     const Snapshot& snapshot, const Rearrangement& r);

enum class DynamicTask { FieldIncrease, VehicleDecrease };
DynamicTask parse_dynamic_task(const std::string& text);
const char* dynamic_task_name(DynamicTask task);

struct DynamicConfig {
  DynamicTask task = DynamicTask::FieldIncrease;
  double fraction = 0.5;
  Objective objective = Objective::Distance;
  // Field increase: plots known at the start (empty = first half, rounded up).
  std::vector<int> initial_plots;
  // Vehicle decrease: removed vehicles (empty = the last one).
  std::vector<int> removed;
  bool finish_line = true;
  FuelConvention fuel_convention = FuelConvention::RateTime;
};

// Plans one scenario for an objective. `phase1` carries the phase-1 plan when
// re-planning, so solvers like continue_phase1 can use it.
struct PlanRequest {
  const Scenario& scenario;
  Objective objective;
  const Scenario* phase1 = nullptr;
  const Plan* phase1_plan = nullptr;
  const Snapshot* snapshot = nullptr;
  const Rearrangement* rearrangement = nullptr;
};
using PlanSolver = std::function<Plan(const PlanRequest&)>;

struct DynamicTotals {
  double distance_m = 0.0;
  double time_s = 0.0;  // makespan
  double fuel_L = 0.0;
  double worked_m = 0.0;
  std::vector<VehicleTally> per_vehicle;  // original vehicle ids
};

struct DynamicOutcome {
  DynamicConfig config;
  std::string scenario_id;
  Scenario phase1;
  Plan phase1_plan;
  ObjectiveVector phase1_objectives;  // of the full phase-1 plan
  std::vector<int> phase1_lines;      // layout line ids of phase-1 nodes
  Snapshot snapshot;
  Rearrangement rearrangement;
  Plan phase2_plan;
  ObjectiveVector phase2_objectives;
  DynamicTotals totals;
  double line_total_m = 0.0;  // sum of all lines that had to be worked
};

DynamicOutcome run_dynamic(const GeneratedScenario& scenario, const DynamicConfig& config,
                           const PlanSolver& phase1_solver, const PlanSolver& phase2_solver);

// Combines snapshot consumption, return legs and phase-2 objectives.
DynamicTotals combine_totals(std::span<const VehicleParams> vehicles, const Snapshot& snapshot,
                             const Rearrangement& r, const ObjectiveVector& phase2);

}  // namespace edvrp
