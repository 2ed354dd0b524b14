#pragma once

// Newline-delimited JSON protocol between the environment and external
// trainers/policies. Every request is one JSON object per line:
//
//   {"v": 1, "type": "reset", "session": "s1", "episode": 3, "id": 17, ...}
//
// and every reply is one line carrying "ok". Failed requests get
//
//   {"v": 1, "ok": false, "type": "step", "error": {"code": "illegal_action",
//    "message": "..."}}
//
// and leave the session and episode exactly as they were.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "edvrp/env.hpp"
#include "edvrp/io.hpp"

namespace edvrp {

inline constexpr int kProtocolVersion = 1;

// Reward configuration as carried by reset requests:
// {"objective": "t", "distance_bonus": true, "bonus_cutoff_steps": 75264,
//  "bonus_weight": 1.0, "normalize": "none" | "random_baseline",
//  "fuel_convention": "rate_time"}.
// Unspecified fields take the training defaults of the objective.
RewardConfig reward_config_from_json(const Json& j, const Scenario& scenario);
Json reward_config_to_json(const RewardConfig& config);

// Graph tensors as nested lists: nodes [N][3], distances [N][N][4],
// vehicles [M][4] as (v_w, v_f, c_w, c_f), start/end node ids.
Json graph_tensors(const Scenario& scenario);
Json objectives_to_json(const ObjectiveVector& objectives);
Json mask_to_json(const std::vector<std::uint8_t>& mask);

struct ServiceOptions {
  int max_sessions = 64;
  // Directory that relative scenario paths in load_scenario resolve against.
  std::string data_dir = ".";
};

// Sessions and their episodes. Thread-safe: sessions are locked
// independently, so connections working on different sessions never contend.
class EnvService {
 public:
  explicit EnvService(ServiceOptions options = {});

  // Handles one request line and returns the reply line (no trailing newline).
  std::string handle(const std::string& line);
  Json handle(const Json& request);

  int session_count() const;

 private:
  struct Session {
    std::mutex mutex;
    std::shared_ptr<const Scenario> scenario;
    std::map<std::string, Environment> episodes;
    std::int64_t global_step = 0;
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  Json dispatch(const std::string& type, const Json& request);
  Json hello(const Json& request);
  Json load_scenario(Session& s, const Json& request);
  Json reset(Session& s, const Json& request);
  Json step(Session& s, const Json& request);
  Json evaluate(Session& s, const Json& request);
  Json close(const std::string& id, Session& s, const Json& request);

  ServiceOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_session_ = 1;
};

// Parses "host:port" (or ":port", "port"). Throws InvalidSpec.
std::pair<std::string, int> parse_endpoint(const std::string& endpoint);

using LineHandler = std::function<std::string(const std::string&)>;

// TCP server: one thread per connection, each running a read-handle-reply
// loop against a shared handler.
class Server {
 public:
  Server(LineHandler handler, const std::string& endpoint);
  Server(std::shared_ptr<EnvService> service, const std::string& endpoint);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts accepting in the background. Returns the bound port.
  int start();
  // Blocks until stop() is called from another thread.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Serves requests from `in` until EOF.
void serve_stream(EnvService& service, std::istream& in, std::ostream& out);

// Blocking line-oriented TCP client.
class LineClient {
 public:
  explicit LineClient(const std::string& endpoint);
  ~LineClient();
  LineClient(const LineClient&) = delete;
  LineClient& operator=(const LineClient&) = delete;

  void send(const std::string& line);
  std::string receive();
  std::string request(const std::string& line) {
    send(line);
    return receive();
  }
  Json request(const Json& message);

 private:
  int fd_ = -1;
  std::string buffer_;
};

// A policy served by an external process. For every decision the client
// sends
//   {"v": 1, "type": "act", "episode": e, "step": k, "current_vehicle": m,
//    "mask": [...], "last_action": [node, entrance] | null,
//    "graph": {...}}          (graph only on step 0)
// and expects {"ok": true, "action": [node, entrance]} or
// {"ok": true, "action_index": i}.
Policy remote_policy(std::shared_ptr<LineClient> client, std::string episode = "0");

}  // namespace edvrp
