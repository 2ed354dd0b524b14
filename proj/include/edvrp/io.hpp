#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "edvrp/layout.hpp"
#include "edvrp/model.hpp"

namespace edvrp {

using Json = nlohmann::ordered_json;

inline constexpr int kScenarioFormatVersion = 1;

// Scenario files are JSON with one top-level key per line and one node,
// vehicle or distance row per line. `write_scenario` output is canonical:
// write(read(text)) == text for any text it produced.
Json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const Json& j);
std::string write_scenario(const Scenario& scenario);
Scenario read_scenario(const std::string& text);

Json layout_to_json(const FieldLayout& layout);
FieldLayout layout_from_json(const Json& j);
std::string write_layout(const FieldLayout& layout);
FieldLayout read_layout(const std::string& text);

struct PlanFile {
  std::string scenario_id;
  std::string algo;
  std::string objective;
  Plan plan;
};

Json plan_to_json(const Plan& plan);
Plan plan_from_json(const Json& actions);
std::string write_plan_file(const PlanFile& file);
PlanFile read_plan_file(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Sidecar layout path for a scenario path: foo.json -> foo.layout.json.
std::filesystem::path layout_path_for(const std::filesystem::path& scenario_path);

}  // namespace edvrp
