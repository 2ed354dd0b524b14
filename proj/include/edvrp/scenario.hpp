#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "edvrp/layout.hpp"
#include "edvrp/model.hpp"
#include "edvrp/rng.hpp"

namespace edvrp {

struct ScenarioSpec {
  int num_plots = 2;
  int num_vehicles = 2;
  std::uint64_t seed = 0;
  TerminalMode mode = TerminalMode::PerVehicle;

  // Synthetic geometry; the defaults give 10-90 lines for 2-6 plots.
  int min_lines_per_plot = 5;
  int max_lines_per_plot = 15;
  double min_spacing_m = 4.0;
  double max_spacing_m = 10.0;
  double min_line_length_m = 60.0;
  double max_line_length_m = 200.0;
  // Tilts the headland edges so plots become irregular quadrilaterals.
  bool jitter = true;

  void validate() const;
};

// Vehicle parameters drawn from the experimental ranges:
// v_w in [1, 3.3], v_f in [max(v_w, 2), 6.94], c_f in [0.005, 0.008],
// c_w in [max(c_f, 0.007), 0.01].
VehicleParams sample_vehicle(Rng& rng);

struct GeneratedScenario {
  std::string id;
  FieldLayout layout;
  std::vector<VehicleParams> vehicles;
  TerminalMode mode = TerminalMode::PerVehicle;
};

// Deterministic in spec (including seed).
GeneratedScenario generate_scenario(const ScenarioSpec& spec);

// Task graph whose d* are road-network shortest paths between entrances.
// `plots` restricts the working lines to a subset of plots (empty = all).
// Throws DisconnectedRoads naming the first unreachable entrance.
TaskGraph derive_task_graph(const FieldLayout& layout, int num_vehicles, TerminalMode mode,
                            std::span<const int> plots = {});

Scenario to_scenario(const GeneratedScenario& generated, std::span<const int> plots = {});

}  // namespace edvrp
