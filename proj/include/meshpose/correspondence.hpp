#pragma once

#include <filesystem>
#include <vector>

#include "meshpose/descriptors.hpp"
#include "meshpose/mesh.hpp"

namespace meshpose {

// Source-to-target vertex correspondence. target[p] is the exact argmin
// over target vertices of the squared descriptor distance; cost[p] is that
// minimum. Ties break to the smallest target index.
struct VertexMap {
  std::vector<int> target;
  std::vector<double> cost;

  std::size_t size() const { return target.size(); }
};

// Exact brute-force nearest-descriptor matching. Both fields must be
// normalized and share L. Parallel over source rows.
VertexMap match(const DescriptorField& source, const DescriptorField& target);

// Serial reference, bitwise-identical to match().
VertexMap match_serial(const DescriptorField& source,
                       const DescriptorField& target);

// Source vertex p receives the coordinates of its matched target vertex.
// Missing table entries for referenced targets are errors.
std::vector<ChartCoords> transfer_chart_coords(const VertexMap& map,
                                               const ChartCoordTable& table);

struct DistortionSummary {
  double mean = 0.0;
  double max = 0.0;
};

// Diagnostic: per source edge (a,b), |g_T(map[a],map[b]) - g_S(a,b)| / g_S(a,b),
// reduced to mean and max. Both geodesics use the same graph Dijkstra so an
// isometric map scores exactly zero.
DistortionSummary map_distortion(const TriMesh& source_mesh,
                                 const TriMesh& target_mesh,
                                 const VertexMap& map);

// Map JSON: {"target": [int, ...], "cost": [float, ...]}.
void save_vertex_map(const VertexMap& map, const std::filesystem::path& path);
VertexMap load_vertex_map(const std::filesystem::path& path);

}  // namespace meshpose
