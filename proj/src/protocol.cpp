#include "edvrp/protocol.hpp"

#include <filesystem>

#include "edvrp/error.hpp"
#include "edvrp/scenario.hpp"
#include "edvrp/solvers.hpp"

namespace edvrp {

namespace {

Json ok_reply(const std::string& type) {
  Json r;
  r["v"] = kProtocolVersion;
  r["ok"] = true;
  r["type"] = type;
  return r;
}

Json error_reply(const std::string& type, const std::string& code, const std::string& message) {
  Json r;
  r["v"] = kProtocolVersion;
  r["ok"] = false;
  r["type"] = type;
  r["error"] = {{"code", code}, {"message", message}};
  return r;
}

std::string key_of(const Json& id) { return id.is_string() ? id.get<std::string>() : id.dump(); }

const Json& required(const Json& request, const char* field) {
  auto it = request.find(field);
  if (it == request.end()) {
    throw Error(ErrorCode::Protocol, std::string("missing field '") + field + "'");
  }
  return *it;
}

Action action_from_request(const Environment& env, const Json& request) {
  if (auto it = request.find("action_index"); it != request.end()) {
    const int index = it->get<int>();
    if (index < 0 || index >= env.action_count()) {
      throw Error(ErrorCode::IllegalAction, "action index " + std::to_string(index) + " out of range");
    }
    return env.action_at(index);
  }
  const Json& a = required(request, "action");
  if (!a.is_array() || a.size() != 2) {
    throw Error(ErrorCode::Protocol, "action must be [node, entrance]");
  }
  Action action{a[0].get<int>(), a[1].get<int>()};
  return action;
}

Json state_json(const Environment& env) {
  Json j;
  j["step"] = env.state().steps;
  j["current_vehicle"] = env.state().current_vehicle;
  j["done"] = env.state().done;
  j["mask"] = mask_to_json(env.mask());
  return j;
}

}  // namespace

RewardConfig reward_config_from_json(const Json& j, const Scenario& scenario) {
  if (!j.is_object()) throw Error(ErrorCode::Protocol, "reward_config must be an object");
  const Objective objective = parse_objective(j.value("objective", std::string("s")));
  RewardConfig c = RewardConfig::training_default(objective);
  c.distance_bonus = j.value("distance_bonus", c.distance_bonus);
  c.bonus_cutoff_steps = j.value("bonus_cutoff_steps", c.bonus_cutoff_steps);
  c.bonus_weight = j.value("bonus_weight", c.bonus_weight);
  if (auto it = j.find("fuel_convention"); it != j.end()) {
    c.fuel_convention = parse_fuel_convention(it->get<std::string>());
  }
  const std::string normalize = j.value("normalize", std::string("none"));
  if (normalize == "random_baseline") {
    const auto means = random_baseline_means(scenario.graph, scenario.vehicles,
                                             j.value("baseline_samples", 64),
                                             j.value("baseline_seed", std::uint64_t{0}));
    for (std::size_t i = 0; i < 3; ++i) c.scale[i] = means[i] > 0.0 ? means[i] : 1.0;
  } else if (normalize != "none") {
    throw Error(ErrorCode::Protocol, "unknown normalize mode '" + normalize + "'");
  }
  return c;
}

Json reward_config_to_json(const RewardConfig& config) {
  Json j;
  j["objective"] = objective_letter(config.objective);
  j["distance_bonus"] = config.distance_bonus;
  j["bonus_cutoff_steps"] = config.bonus_cutoff_steps;
  j["bonus_weight"] = config.bonus_weight;
  j["scale"] = config.scale;
  j["fuel_convention"] = fuel_convention_name(config.fuel_convention);
  return j;
}

Json graph_tensors(const Scenario& scenario) {
  const TaskGraph& g = scenario.graph;
  const int n = g.num_nodes();
  Json j;
  j["mode"] = terminal_mode_name(g.mode());
  j["L"] = g.num_lines();
  j["M"] = g.num_vehicles();
  Json nodes = Json::array();
  for (int i = 0; i < n; ++i) {
    const auto f = g.node_features(i);
    nodes.push_back(Json::array({f[0], f[1], f[2]}));
  }
  j["nodes"] = std::move(nodes);
  Json dist = Json::array();
  for (int a = 0; a < n; ++a) {
    Json row = Json::array();
    for (int b = 0; b < n; ++b) {
      row.push_back(Json::array({g.distance(a, b, 0, 0), g.distance(a, b, 0, 1),
                                 g.distance(a, b, 1, 0), g.distance(a, b, 1, 1)}));
    }
    dist.push_back(std::move(row));
  }
  j["distances"] = std::move(dist);
  Json vehicles = Json::array();
  for (const auto& v : scenario.vehicles) vehicles.push_back(Json::array({v.v_w, v.v_f, v.c_w, v.c_f}));
  j["vehicles"] = std::move(vehicles);
  Json starts = Json::array();
  Json ends = Json::array();
  for (int k = 0; k < g.num_vehicles(); ++k) {
    starts.push_back(g.start_node(k));
    ends.push_back(g.end_node(k));
  }
  j["start_nodes"] = std::move(starts);
  j["end_nodes"] = std::move(ends);
  return j;
}

Json objectives_to_json(const ObjectiveVector& o) {
  Json j;
  j["distance_m"] = o.total_transfer_distance_m;
  j["time_s"] = o.makespan_s;
  j["fuel_L"] = o.total_fuel_L;
  j["working_distance_m"] = o.total_working_distance_m;
  Json per = Json::array();
  for (const auto& t : o.per_vehicle) {
    per.push_back({{"transfer_m", t.transfer_m}, {"work_m", t.work_m}, {"time_s", t.time_s},
                   {"fuel_L", t.fuel_L}, {"lines", t.lines}});
  }
  j["per_vehicle"] = std::move(per);
  return j;
}

Json mask_to_json(const std::vector<std::uint8_t>& mask) {
  Json j = Json::array();
  for (auto m : mask) j.push_back(static_cast<int>(m));
  return j;
}

EnvService::EnvService(ServiceOptions options) : options_(std::move(options)) {}

int EnvService::session_count() const {
  std::lock_guard lock(mutex_);
  return static_cast<int>(sessions_.size());
}

std::shared_ptr<EnvService::Session> EnvService::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::Protocol, "unknown session '" + id + "'");
  return it->second;
}

std::string EnvService::handle(const std::string& line) {
  Json request;
  try {
    request = Json::parse(line);
  } catch (const Json::exception& e) {
    return error_reply("", error_code_name(ErrorCode::Parse), e.what()).dump();
  }
  return handle(request).dump();
}

Json EnvService::handle(const Json& request) {
  std::string type;
  Json reply;
  try {
    if (!request.is_object()) throw Error(ErrorCode::Protocol, "request must be a JSON object");
    type = required(request, "type").get<std::string>();
    if (request.value("v", kProtocolVersion) != kProtocolVersion) {
      throw Error(ErrorCode::Protocol, "unsupported protocol version");
    }
    reply = dispatch(type, request);
  } catch (const Error& e) {
    reply = error_reply(type, error_code_name(e.code()), e.what());
  } catch (const Json::exception& e) {
    reply = error_reply(type, error_code_name(ErrorCode::Protocol), e.what());
  }
  if (request.is_object()) {
    for (const char* echo : {"session", "episode", "id"}) {
      if (auto it = request.find(echo); it != request.end() && !reply.contains(echo)) reply[echo] = *it;
    }
  }
  return reply;
}

Json EnvService::dispatch(const std::string& type, const Json& request) {
  if (type == "hello") return hello(request);
  const std::string id = key_of(required(request, "session"));
  auto session = find(id);
  std::lock_guard lock(session->mutex);
  if (type == "load_scenario") return load_scenario(*session, request);
  if (type == "reset") return reset(*session, request);
  if (type == "step") return step(*session, request);
  if (type == "evaluate") return evaluate(*session, request);
  if (type == "close") return close(id, *session, request);
  throw Error(ErrorCode::Protocol, "unknown message type '" + type + "'");
}

Json EnvService::hello(const Json& request) {
  std::lock_guard lock(mutex_);
  std::string id;
  if (auto it = request.find("session"); it != request.end()) {
    id = key_of(*it);
  } else {
    do {
      id = "s" + std::to_string(next_session_++);
    } while (sessions_.count(id) != 0);
  }
  if (sessions_.count(id) == 0) {
    if (static_cast<int>(sessions_.size()) >= options_.max_sessions) {
      throw Error(ErrorCode::Protocol, "session limit of " + std::to_string(options_.max_sessions) + " reached");
    }
    sessions_.emplace(id, std::make_shared<Session>());
  }
  Json r = ok_reply("hello");
  r["session"] = id;
  r["protocol"] = "edvrp-env";
  r["messages"] = {"hello", "load_scenario", "reset", "step", "evaluate", "close"};
  return r;
}

Json EnvService::load_scenario(Session& s, const Json& request) {
  Scenario scenario;
  if (auto it = request.find("scenario"); it != request.end()) {
    scenario = scenario_from_json(*it);
  } else if (auto p = request.find("path"); p != request.end()) {
    std::filesystem::path path = p->get<std::string>();
    if (path.is_relative()) path = std::filesystem::path(options_.data_dir) / path;
    scenario = read_scenario(read_text_file(path));
  } else if (auto g = request.find("generate"); g != request.end()) {
    ScenarioSpec spec;
    spec.num_plots = g->value("plots", spec.num_plots);
    spec.num_vehicles = g->value("vehicles", spec.num_vehicles);
    spec.seed = g->value("seed", spec.seed);
    if (auto m = g->find("mode"); m != g->end()) spec.mode = parse_terminal_mode(m->get<std::string>());
    scenario = to_scenario(generate_scenario(spec));
  } else {
    throw Error(ErrorCode::Protocol, "load_scenario needs 'scenario', 'path' or 'generate'");
  }
  for (const auto& v : scenario.vehicles) v.validate();
  s.scenario = std::make_shared<const Scenario>(std::move(scenario));
  s.episodes.clear();
  Json r = ok_reply("load_scenario");
  r["scenario_id"] = s.scenario->id;
  r["L"] = s.scenario->graph.num_lines();
  r["M"] = s.scenario->graph.num_vehicles();
  r["action_count"] = 2 * s.scenario->graph.num_lines() + 1;
  return r;
}

Json EnvService::reset(Session& s, const Json& request) {
  if (!s.scenario) throw Error(ErrorCode::Protocol, "no scenario loaded in this session");
  const std::string episode = key_of(required(request, "episode"));
  RewardConfig config;
  if (auto it = request.find("reward_config"); it != request.end()) {
    config = reward_config_from_json(*it, *s.scenario);
  }
  if (auto it = request.find("global_step"); it != request.end()) s.global_step = it->get<std::int64_t>();
  auto [pos, inserted] = s.episodes.try_emplace(episode, s.scenario, config);
  if (!inserted) pos->second.set_reward_config(config);
  Environment& env = pos->second;
  env.reset(s.global_step);
  Json r = ok_reply("reset");
  r.update(state_json(env));
  r["reward_config"] = reward_config_to_json(config);
  if (request.value("include_graph", true)) r["graph"] = graph_tensors(*s.scenario);
  return r;
}

Json EnvService::step(Session& s, const Json& request) {
  const std::string episode = key_of(required(request, "episode"));
  auto it = s.episodes.find(episode);
  if (it == s.episodes.end()) throw Error(ErrorCode::Protocol, "unknown episode '" + episode + "'");
  Environment& env = it->second;
  const Action action = action_from_request(env, request);
  const StepResult result = env.step(action);
  ++s.global_step;
  Json r = ok_reply("step");
  r["rewards"] = {{"distance_m", result.rewards.distance_m},
                  {"time_s", result.rewards.time_s},
                  {"fuel_L", result.rewards.fuel_L}};
  r["reward"] = result.combined;
  r.update(state_json(env));
  if (result.done) {
    r["objectives"] = objectives_to_json(env.objectives());
    r["plan"] = plan_to_json(env.state().plan);
  }
  return r;
}

Json EnvService::evaluate(Session& s, const Json& request) {
  if (!s.scenario) throw Error(ErrorCode::Protocol, "no scenario loaded in this session");
  Json r = ok_reply("evaluate");
  const FuelConvention convention =
      parse_fuel_convention(request.value("fuel_convention", std::string("rate_time")));
  if (auto p = request.find("plan"); p != request.end()) {
    const Plan plan = plan_from_json(*p);
    r["objectives"] = objectives_to_json(
        evaluate_plan(s.scenario->graph, s.scenario->vehicles, plan, convention));
    return r;
  }
  const std::string episode = key_of(required(request, "episode"));
  auto it = s.episodes.find(episode);
  if (it == s.episodes.end()) throw Error(ErrorCode::Protocol, "unknown episode '" + episode + "'");
  r["done"] = it->second.state().done;
  r["plan"] = plan_to_json(it->second.state().plan);
  r["objectives"] = objectives_to_json(it->second.objectives());
  return r;
}

Json EnvService::close(const std::string& id, Session& s, const Json& request) {
  Json r = ok_reply("close");
  if (auto it = request.find("episode"); it != request.end()) {
    r["closed"] = s.episodes.erase(key_of(*it)) > 0;
    return r;
  }
  std::lock_guard lock(mutex_);
  r["closed"] = sessions_.erase(id) > 0;
  return r;
}

}  // namespace edvrp
