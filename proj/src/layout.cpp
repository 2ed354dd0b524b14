#include "edvrp/layout.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <queue>

#include "edvrp/error.hpp"

namespace edvrp {

double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

Point lerp(Point a, Point b, double t) { return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t}; }

int RoadGraph::add_vertex(Point p) {
  vertices_.push_back(p);
  adjacency_.emplace_back();
  return static_cast<int>(vertices_.size()) - 1;
}

void RoadGraph::add_edge(int u, int v) { add_edge(u, v, distance(vertex(u), vertex(v))); }

void RoadGraph::add_edge(int u, int v, double length_m) {
  if (u < 0 || v < 0 || u >= num_vertices() || v >= num_vertices() || u == v) {
    throw Error(ErrorCode::InvalidGraph, "road edge endpoints out of range");
  }
  if (!(length_m >= 0.0) || !std::isfinite(length_m)) {
    throw Error(ErrorCode::InvalidGraph, "road edge length must be finite and non-negative");
  }
  edges_.push_back({u, v, length_m});
  adjacency_[static_cast<std::size_t>(u)].push_back({v, length_m});
  adjacency_[static_cast<std::size_t>(v)].push_back({u, length_m});
}

double RoadGraph::edge_length(int u, int v) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Arc& a : adjacency_.at(static_cast<std::size_t>(u))) {
    if (a.to == v) best = std::min(best, a.length_m);
  }
  if (!std::isfinite(best)) throw Error(ErrorCode::InvalidGraph, "no road between vertices");
  return best;
}

std::vector<double> RoadGraph::shortest_from(int source, std::vector<int>* predecessor) const {
  const auto n = vertices_.size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  if (predecessor) predecessor->assign(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[static_cast<std::size_t>(source)] = 0.0;
  queue.push({0.0, source});
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (const Arc& a : adjacency_[static_cast<std::size_t>(u)]) {
      const double nd = d + a.length_m;
      auto& slot = dist[static_cast<std::size_t>(a.to)];
      // Ties resolve to the lower predecessor id for deterministic paths.
      if (nd < slot ||
          (predecessor && nd == slot && u < (*predecessor)[static_cast<std::size_t>(a.to)])) {
        const bool improved = nd < slot;
        slot = nd;
        if (predecessor) (*predecessor)[static_cast<std::size_t>(a.to)] = u;
        if (improved) queue.push({nd, a.to});
      }
    }
  }
  return dist;
}

std::vector<double> RoadGraph::shortest_from(const EdgePoint& point) const {
  const double length = edge_length(point.u, point.v);
  const auto from_u = shortest_from(point.u);
  const auto from_v = shortest_from(point.v);
  std::vector<double> dist(vertices_.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    dist[i] = std::min(point.offset_m + from_u[i], (length - point.offset_m) + from_v[i]);
  }
  return dist;
}

RoadDistances::RoadDistances(const RoadGraph& roads)
    : roads_(&roads), rows_(static_cast<std::size_t>(roads.num_vertices())) {}

const std::vector<double>& RoadDistances::row(int v) {
  auto& slot = rows_.at(static_cast<std::size_t>(v));
  if (slot.empty()) slot = roads_->shortest_from(v);
  return slot;
}

double RoadDistances::operator()(int u, int v) {
  return u <= v ? row(u)[static_cast<std::size_t>(v)] : row(v)[static_cast<std::size_t>(u)];
}

std::vector<int> RoadGraph::shortest_path(int source, int target) const {
  std::vector<int> pred;
  const auto dist = shortest_from(source, &pred);
  if (!std::isfinite(dist[static_cast<std::size_t>(target)])) {
    throw Error(ErrorCode::DisconnectedRoads, "vertex " + std::to_string(target) +
                                                  " unreachable from " + std::to_string(source));
  }
  std::deque<int> path;
  for (int v = target; v != -1; v = pred[static_cast<std::size_t>(v)]) {
    path.push_front(v);
    if (v == source) break;
  }
  return {path.begin(), path.end()};
}

std::vector<bool> RoadGraph::reachable_from(int source) const {
  std::vector<bool> seen(vertices_.size(), false);
  std::deque<int> queue{source};
  seen[static_cast<std::size_t>(source)] = true;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (const Arc& a : adjacency_[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(a.to)]) {
        seen[static_cast<std::size_t>(a.to)] = true;
        queue.push_back(a.to);
      }
    }
  }
  return seen;
}

int FieldLayout::line_vertex(int line, int entrance) const {
  const auto& l = lines.at(static_cast<std::size_t>(line));
  return entrance == 0 ? l.vertex_a : l.vertex_b;
}

}  // namespace edvrp
