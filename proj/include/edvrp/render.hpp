#pragma once

#include <string>
#include <vector>

#include "edvrp/dynamic.hpp"
#include "edvrp/layout.hpp"
#include "edvrp/model.hpp"

namespace edvrp {

// Per-vehicle trajectory of a plan on a graph derived from `layout`: road
// shortest paths for transfers, straight segments for working lines. Empty
// routes give empty polylines.
std::vector<std::vector<Point>> plan_trajectories(const FieldLayout& layout, const TaskGraph& graph,
                                                  const Plan& plan);

// Same for a phase-2 plan, whose nodes refer to the rearrangement.
std::vector<std::vector<Point>> phase2_trajectories(const FieldLayout& layout,
                                                    const Snapshot& snapshot,
                                                    const Rearrangement& r, const Plan& plan);

double polyline_length(const std::vector<Point>& points);
// The first `length` meters of a polyline.
std::vector<Point> truncate_polyline(const std::vector<Point>& points, double length);

// Fixed palette indexed by vehicle id (wraps around).
const char* vehicle_color(int vehicle);

struct FieldDrawing {
  std::string title;
  std::vector<std::vector<Point>> routes;   // colored by vehicle index
  std::vector<int> route_vehicles;          // vehicle id per route (defaults to index)
  std::vector<std::vector<Point>> phase1;   // drawn in gray
  std::vector<Point> phase2_starts;         // star markers
};

// Plots, roads (solid), working lines (dashed), entrances (dots), the depot
// (triangle) and any trajectories. Output bytes depend only on the inputs.
std::string render_field(const FieldLayout& layout, const FieldDrawing& drawing = {});

// Plan trajectories for a graph derived from `layout`. Throws InvalidPlan for
// plans with unknown nodes.
std::string render_plan(const FieldLayout& layout, const TaskGraph& graph, const Plan& plan,
                        const std::string& title = "");

// Phase-1 paths up to the snapshot in gray, phase-2 routes in vehicle colors
// and star markers where phase 2 starts.
std::string render_dynamic(const FieldLayout& layout, const DynamicOutcome& outcome);

struct ChartSeries {
  std::string name;
  std::vector<double> values;
};

// Line chart of one or more series against their index.
std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::vector<ChartSeries>& series);

}  // namespace edvrp
