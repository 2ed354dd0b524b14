#include "edvrp/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "edvrp/env.hpp"
#include "edvrp/error.hpp"
#include "edvrp/rng.hpp"

namespace edvrp {

namespace {

// Token order over lines [0, L) and separators [L, L + M - 1).
struct Genome {
  std::vector<int> order;
  std::vector<std::uint8_t> entrances;
  double fitness = 0.0;
  std::uint64_t serial = 0;  // insertion index, breaks fitness ties
};

class GenomeCodec {
 public:
  GenomeCodec(const TaskGraph& graph, std::span<const VehicleParams> vehicles,
              FuelConvention convention)
      : graph_(graph), vehicles_(vehicles), convention_(convention) {}

  int lines() const { return graph_.num_lines(); }
  int tokens() const { return graph_.num_lines() + graph_.num_vehicles() - 1; }
  bool is_separator(int token) const { return token >= lines(); }

  Genome random(Rng& rng) const {
    Genome g;
    g.order.resize(static_cast<std::size_t>(tokens()));
    std::iota(g.order.begin(), g.order.end(), 0);
    rng.shuffle(std::span<int>(g.order));
    g.entrances.resize(static_cast<std::size_t>(lines()));
    for (auto& e : g.entrances) e = rng.bernoulli(0.5) ? 1 : 0;
    repair(g);
    return g;
  }

  // Moves every forced line to the front of its vehicle's segment.
  void repair(Genome& g) const {
    const auto& forced = graph_.options().forced_first;
    for (int k = 0; k < static_cast<int>(forced.size()); ++k) {
      const auto& f = forced[static_cast<std::size_t>(k)];
      if (!f) continue;
      auto it = std::find(g.order.begin(), g.order.end(), f->node);
      g.order.erase(it);
      int seen = 0;
      auto pos = g.order.begin();
      while (seen < k) {
        if (is_separator(*pos)) ++seen;
        ++pos;
      }
      g.order.insert(pos, f->node);
      g.entrances[static_cast<std::size_t>(f->node)] = static_cast<std::uint8_t>(f->entrance);
    }
  }

  Plan decode(const Genome& g) const {
    Plan plan;
    plan.actions.reserve(g.order.size());
    for (int t : g.order) {
      plan.actions.push_back(is_separator(t)
                                 ? Action{kSeparator, 0}
                                 : Action{t, g.entrances[static_cast<std::size_t>(t)]});
    }
    return plan;
  }

  ObjectiveVector evaluate(const Genome& g) const {
    PlanAccumulator acc(graph_, vehicles_, convention_);
    fold_plan(acc, decode(g));
    return acc.result();
  }

 private:
  const TaskGraph& graph_;
  std::span<const VehicleParams> vehicles_;
  FuelConvention convention_;
};

// OX1: keep a slice of the first parent, fill the rest in the second
// parent's order starting after the slice.
std::vector<int> ordered_crossover(const std::vector<int>& a, const std::vector<int>& b,
                                   Rng& rng) {
  const auto n = static_cast<std::int64_t>(a.size());
  if (n < 2) return a;
  auto i = rng.uniform_int(0, n - 1);
  auto j = rng.uniform_int(0, n - 1);
  if (i > j) std::swap(i, j);
  std::vector<int> child(a.size(), -1);
  std::vector<std::uint8_t> used(a.size(), 0);
  for (auto p = i; p <= j; ++p) {
    child[static_cast<std::size_t>(p)] = a[static_cast<std::size_t>(p)];
    used[static_cast<std::size_t>(a[static_cast<std::size_t>(p)])] = 1;
  }
  std::int64_t write = (j + 1) % n;
  for (std::int64_t k = 0; k < n; ++k) {
    const int token = b[static_cast<std::size_t>((j + 1 + k) % n)];
    if (used[static_cast<std::size_t>(token)]) continue;
    child[static_cast<std::size_t>(write)] = token;
    write = (write + 1) % n;
  }
  return child;
}

bool better(const Genome& a, const Genome& b) {
  if (a.fitness != b.fitness) return a.fitness < b.fitness;
  return a.serial < b.serial;
}

}  // namespace

Plan solve_random(const TaskGraph& graph, std::span<const VehicleParams> vehicles,
                  std::uint64_t seed) {
  GenomeCodec codec(graph, vehicles, FuelConvention::RateTime);
  Rng rng(seed);
  return codec.decode(codec.random(rng));
}

void GAConfig::validate() const {
  auto rate = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (population_size < 2) throw Error(ErrorCode::InvalidSpec, "population must be at least 2");
  if (!rate(crossover_rate) || !rate(segment_reverse_rate) || !rate(node_swap_rate) ||
      !rate(entrance_flip_rate) || !rate(separator_move_rate)) {
    throw Error(ErrorCode::InvalidSpec, "GA rates must lie in [0, 1]");
  }
  if (elitism_count < 0 || elitism_count > population_size) {
    throw Error(ErrorCode::InvalidSpec, "elitism count out of range");
  }
  if (tournament_size < 1) throw Error(ErrorCode::InvalidSpec, "tournament size must be positive");
  if (generations < 0 || time_budget_s < 0.0) {
    throw Error(ErrorCode::InvalidSpec, "GA budget must be non-negative");
  }
}

GAResult solve_oga(const TaskGraph& graph, std::span<const VehicleParams> vehicles,
                   Objective objective, const GAConfig& config) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  GenomeCodec codec(graph, vehicles, config.fuel_convention);
  Rng rng(config.seed);
  std::uint64_t serial = 0;

  auto score = [&](Genome& g) {
    g.fitness = codec.evaluate(g).value(objective);
    g.serial = serial++;
  };

  std::vector<Genome> population;
  population.reserve(static_cast<std::size_t>(config.population_size));
  for (int i = 0; i < config.population_size; ++i) {
    population.push_back(codec.random(rng));
    score(population.back());
  }
  std::sort(population.begin(), population.end(), better);

  GAResult result;
  result.best_history.push_back(population.front().fitness);

  auto tournament = [&]() -> const Genome& {
    const Genome* best = nullptr;
    for (int t = 0; t < config.tournament_size; ++t) {
      const auto& c = population[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(population.size()) - 1))];
      if (!best || better(c, *best)) best = &c;
    }
    return *best;
  };

  const int tokens = codec.tokens();
  const int lines = codec.lines();
  auto out_of_budget = [&](int generation) {
    if (config.generations == 0 && config.time_budget_s == 0.0) return true;
    if (config.generations > 0 && generation >= config.generations) return true;
    if (config.time_budget_s > 0.0) {
      const std::chrono::duration<double> elapsed = Clock::now() - started;
      if (elapsed.count() >= config.time_budget_s) return true;
    }
    return false;
  };

  int generation = 0;
  while (!out_of_budget(generation) && tokens > 0) {
    std::vector<Genome> next;
    next.reserve(population.size());
    for (int e = 0; e < config.elitism_count; ++e) next.push_back(population[static_cast<std::size_t>(e)]);
    while (static_cast<int>(next.size()) < config.population_size) {
      const Genome& a = tournament();
      const Genome& b = tournament();
      Genome child;
      if (rng.bernoulli(config.crossover_rate)) {
        child.order = ordered_crossover(a.order, b.order, rng);
        child.entrances = a.entrances;
        for (std::size_t j = 0; j < child.entrances.size(); ++j) {
          if (rng.bernoulli(0.5)) child.entrances[j] = b.entrances[j];
        }
      } else {
        child.order = a.order;
        child.entrances = a.entrances;
      }
      if (tokens > 1 && rng.bernoulli(config.segment_reverse_rate)) {
        // Reversing a run of lines and flipping their entrances keeps the
        // interior legs and only changes the two boundary legs.
        auto i = rng.uniform_int(0, tokens - 1);
        auto j = rng.uniform_int(0, tokens - 1);
        if (i > j) std::swap(i, j);
        std::reverse(child.order.begin() + i, child.order.begin() + j + 1);
        for (auto p = i; p <= j; ++p) {
          const int t = child.order[static_cast<std::size_t>(p)];
          if (!codec.is_separator(t)) child.entrances[static_cast<std::size_t>(t)] ^= 1;
        }
      }
      if (tokens > 1 && rng.bernoulli(config.node_swap_rate)) {
        const auto i = rng.uniform_int(0, tokens - 1);
        const auto j = rng.uniform_int(0, tokens - 1);
        std::swap(child.order[static_cast<std::size_t>(i)], child.order[static_cast<std::size_t>(j)]);
      }
      if (lines > 0 && rng.bernoulli(config.entrance_flip_rate)) {
        child.entrances[static_cast<std::size_t>(rng.uniform_int(0, lines - 1))] ^= 1;
      }
      if (tokens > lines && rng.bernoulli(config.separator_move_rate)) {
        const int sep = static_cast<int>(rng.uniform_int(lines, tokens - 1));
        child.order.erase(std::find(child.order.begin(), child.order.end(), sep));
        const auto pos = rng.uniform_int(0, tokens - 1);
        child.order.insert(child.order.begin() + pos, sep);
      }
      codec.repair(child);
      score(child);
      next.push_back(std::move(child));
    }
    population = std::move(next);
    std::sort(population.begin(), population.end(), better);
    ++generation;
    result.best_history.push_back(population.front().fitness);
  }

  result.generations = generation;
  result.plan = codec.decode(population.front());
  result.objectives = codec.evaluate(population.front());
  result.runtime_s = std::chrono::duration<double>(Clock::now() - started).count();
  return result;
}

ExactResult solve_exact(const TaskGraph& graph, std::span<const VehicleParams> vehicles,
                        Objective objective, FuelConvention convention) {
  const int l = graph.num_lines();
  const int m = graph.num_vehicles();
  if (l > kExactMaxLines || m > kExactMaxVehicles) {
    throw Error(ErrorCode::TooLarge, "exact solver supports at most " +
                                         std::to_string(kExactMaxLines) + " lines and " +
                                         std::to_string(kExactMaxVehicles) + " vehicles (got " +
                                         std::to_string(l) + " lines, " + std::to_string(m) +
                                         " vehicles)");
  }
  const bool check_forced = !graph.options().forced_first.empty();
  std::vector<int> tokens(static_cast<std::size_t>(m - 1), kSeparator);
  for (int j = 0; j < l; ++j) tokens.push_back(j);

  ExactResult best;
  bool have = false;
  double best_value = 0.0;
  Plan candidate;
  candidate.actions.resize(tokens.size());
  do {
    for (std::uint32_t bits = 0; bits < (1u << l); ++bits) {
      for (std::size_t p = 0; p < tokens.size(); ++p) {
        const int t = tokens[p];
        candidate.actions[p] =
            t == kSeparator ? Action{kSeparator, 0}
                            : Action{t, static_cast<int>((bits >> (l - 1 - t)) & 1u)};
      }
      if (check_forced && !validate_plan(graph, candidate).valid()) continue;
      PlanAccumulator acc(graph, vehicles, convention);
      fold_plan(acc, candidate);
      ++best.evaluated;
      const ObjectiveVector obj = acc.result();
      const double v = obj.value(objective);
      if (!have || v < best_value ||
          (v == best_value && candidate.actions < best.plan.actions)) {
        have = true;
        best_value = v;
        best.plan = candidate;
        best.objectives = obj;
      }
    }
  } while (std::next_permutation(tokens.begin(), tokens.end()));
  return best;
}

Plan solve_greedy(const TaskGraph& graph, std::span<const VehicleParams> vehicles,
                  Objective objective) {
  auto scenario = std::make_shared<Scenario>();
  scenario->graph = graph;
  scenario->vehicles.assign(vehicles.begin(), vehicles.end());
  return rollout(scenario, greedy_policy(objective)).plan;
}

std::array<double, 3> random_baseline_means(const TaskGraph& graph,
                                            std::span<const VehicleParams> vehicles, int samples,
                                            std::uint64_t seed) {
  std::array<double, 3> sum{0.0, 0.0, 0.0};
  for (int i = 0; i < samples; ++i) {
    const auto plan = solve_random(graph, vehicles, derive_seed(seed, static_cast<std::uint64_t>(i)));
    const auto obj = evaluate_plan(graph, vehicles, plan);
    sum[0] += obj.total_transfer_distance_m;
    sum[1] += obj.makespan_s;
    sum[2] += obj.total_fuel_L;
  }
  for (auto& s : sum) s /= std::max(samples, 1);
  return sum;
}

}  // namespace edvrp
