#pragma once

#include <array>
#include <vector>

namespace edvrp {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);
Point lerp(Point a, Point b, double t);

struct RoadEdge {
  int u = 0;
  int v = 0;
  double length_m = 0.0;
};

// A position on a road edge, `offset_m` meters from `u` towards `v`.
struct EdgePoint {
  int u = 0;
  int v = 0;
  double offset_m = 0.0;
};

// Undirected road network with straight-segment edges.
class RoadGraph {
 public:
  int add_vertex(Point p);
  // Length defaults to the Euclidean distance between the endpoints.
  void add_edge(int u, int v);
  void add_edge(int u, int v, double length_m);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<RoadEdge>& edges() const { return edges_; }
  Point vertex(int v) const { return vertices_.at(static_cast<std::size_t>(v)); }
  double edge_length(int u, int v) const;

  // Dijkstra from one vertex. `predecessor` receives the previous vertex on a
  // shortest path (or -1). Unreachable vertices get +infinity.
  std::vector<double> shortest_from(int source, std::vector<int>* predecessor = nullptr) const;
  // Shortest distances from a point on an edge to every vertex.
  std::vector<double> shortest_from(const EdgePoint& point) const;

  // Vertex sequence of a shortest path from `source` to `target`.
  std::vector<int> shortest_path(int source, int target) const;

  // Vertices reachable from `source` by breadth-first search.
  std::vector<bool> reachable_from(int source) const;

 private:
  struct Arc {
    int to;
    double length_m;
  };
  std::vector<Point> vertices_;
  std::vector<RoadEdge> edges_;
  std::vector<std::vector<Arc>> adjacency_;
};

// Memoized all-pairs road distances. Pairs are always read from the smaller
// vertex id's Dijkstra row, so d(u, v) and d(v, u) are bit-identical.
class RoadDistances {
 public:
  explicit RoadDistances(const RoadGraph& roads);
  double operator()(int u, int v);

 private:
  const std::vector<double>& row(int v);

  const RoadGraph* roads_;
  std::vector<std::vector<double>> rows_;
};

struct LayoutLine {
  int plot = 0;
  Point a;  // entrance 0
  Point b;  // entrance 1
  int vertex_a = -1;
  int vertex_b = -1;
  double length_m = 0.0;  // quantized |b - a|
};

struct Plot {
  std::array<Point, 4> corners;
  std::array<int, 4> corner_vertices{-1, -1, -1, -1};
  std::vector<int> lines;  // global line ids
  double spacing_m = 0.0;
};

// Geometric ground truth: plots with parallel working lines whose endpoints
// sit on headland roads, inter-plot connectors and a depot.
struct FieldLayout {
  std::vector<Plot> plots;
  std::vector<LayoutLine> lines;
  RoadGraph roads;
  int depot_vertex = -1;
  // Start position per vehicle in per-vehicle-terminal mode.
  std::vector<int> start_vertices;

  Point depot() const { return roads.vertex(depot_vertex); }
  int line_vertex(int line, int entrance) const;
};

}  // namespace edvrp
