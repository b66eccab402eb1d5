#pragma once

#include <utility>
#include <vector>

#include "meshpose/mesh.hpp"

namespace meshpose {

// Undirected vertex-edge graph with Euclidean edge weights. Neighbor lists
// are sorted by vertex id so traversals are deterministic.
struct EdgeGraph {
  std::vector<std::vector<std::pair<int, double>>> adjacency;

  static EdgeGraph build(const TriMesh& mesh);
  int vertex_count() const { return static_cast<int>(adjacency.size()); }
};

struct DistanceField {
  enum class SourceKind { Vertex, Part };
  SourceKind kind = SourceKind::Vertex;
  int source = 0;  // vertex id or part id, per kind
  std::vector<double> distances;
};

// Binary-heap Dijkstra over the edge graph. `out` is resized to the vertex
// count; unreachable vertices are left at +inf.
void dijkstra(const EdgeGraph& graph, int source, std::vector<double>& out);

// Shortest-path distance from `source` to every vertex. Throws on a
// disconnected mesh or an out-of-range source id.
DistanceField single_source_distance(const TriMesh& mesh, int source);

// Arithmetic mean over the part's sources of the single-source fields,
// accumulated in ascending source-vertex order so the result is bitwise
// independent of thread count. stride > 1 keeps every stride-th part vertex
// (a documented approximation for large meshes; default off).
DistanceField mean_distance_to_part(const TriMesh& mesh, const PartChart& chart,
                                    int part, int stride = 1);

// Single-buffer reference implementation; must match the parallel kernel
// bitwise. Kept for tests and the benchmark.
DistanceField mean_distance_to_part_serial(const TriMesh& mesh,
                                           const PartChart& chart, int part,
                                           int stride = 1);

}  // namespace meshpose
