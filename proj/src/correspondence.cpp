#include "meshpose/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "meshpose/errors.hpp"
#include "meshpose/geodesics.hpp"

namespace meshpose {

namespace {

using nlohmann::json;

void check_match_inputs(const DescriptorField& source,
                        const DescriptorField& target) {
  if (!source.normalized || !target.normalized)
    throw ValidationError("match requires normalized descriptor fields");
  if (source.L != target.L)
    throw ValidationError("descriptor L mismatch: " + std::to_string(source.L) +
                          " vs " + std::to_string(target.L));
  if (source.vertex_count == 0 || target.vertex_count == 0)
    throw ValidationError("descriptor fields must be nonempty");
}

// Exact argmin over target rows; ties go to the smaller index because only
// a strictly better cost replaces the current best.
void match_row(const DescriptorField& source, const DescriptorField& target,
               std::size_t p, int& best_index, double& best_cost) {
  const int L = source.L;
  const double* row = source.row(p);
  best_cost = std::numeric_limits<double>::infinity();
  best_index = -1;
  for (std::size_t q = 0; q < target.vertex_count; ++q) {
    const double* other = target.row(q);
    double cost = 0.0;
    for (int l = 0; l < L; ++l) {
      const double diff = row[l] - other[l];
      cost += diff * diff;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_index = static_cast<int>(q);
    }
  }
}

// Unique undirected source edges (a < b), lexicographic.
std::vector<std::pair<int, int>> edge_list(const TriMesh& mesh) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(mesh.faces.size() * 3);
  for (const Face& f : mesh.faces)
    for (int e = 0; e < 3; ++e) {
      const int a = f[e], b = f[(e + 1) % 3];
      edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace

VertexMap match(const DescriptorField& source, const DescriptorField& target) {
  check_match_inputs(source, target);
  VertexMap map;
  map.target.assign(source.vertex_count, -1);
  map.cost.assign(source.vertex_count, 0.0);

#pragma omp parallel for schedule(static)
  for (long long p = 0; p < static_cast<long long>(source.vertex_count); ++p) {
    int best_index;
    double best_cost;
    match_row(source, target, static_cast<std::size_t>(p), best_index,
              best_cost);
    map.target[static_cast<std::size_t>(p)] = best_index;
    map.cost[static_cast<std::size_t>(p)] = best_cost;
  }
  return map;
}

VertexMap match_serial(const DescriptorField& source,
                       const DescriptorField& target) {
  check_match_inputs(source, target);
  VertexMap map;
  map.target.assign(source.vertex_count, -1);
  map.cost.assign(source.vertex_count, 0.0);
  for (std::size_t p = 0; p < source.vertex_count; ++p)
    match_row(source, target, p, map.target[p], map.cost[p]);
  return map;
}

std::vector<ChartCoords> transfer_chart_coords(const VertexMap& map,
                                               const ChartCoordTable& table) {
  std::vector<ChartCoords> out;
  out.reserve(map.size());
  for (std::size_t p = 0; p < map.size(); ++p) {
    const auto it = table.find(map.target[p]);
    if (it == table.end())
      throw ValidationError("no chart coordinates for target vertex " +
                            std::to_string(map.target[p]) +
                            " (matched from source vertex " +
                            std::to_string(p) + ")");
    out.push_back(it->second);
  }
  return out;
}

DistortionSummary map_distortion(const TriMesh& source_mesh,
                                 const TriMesh& target_mesh,
                                 const VertexMap& map) {
  validate_mesh(source_mesh);
  validate_mesh(target_mesh);
  if (map.size() != source_mesh.vertices.size())
    throw ValidationError("map covers " + std::to_string(map.size()) +
                          " vertices, source mesh has " +
                          std::to_string(source_mesh.vertices.size()));
  for (int t : map.target)
    if (t < 0 || t >= target_mesh.vertex_count())
      throw ValidationError("map target vertex " + std::to_string(t) +
                            " out of range");

  const auto edges = edge_list(source_mesh);
  const EdgeGraph source_graph = EdgeGraph::build(source_mesh);
  const EdgeGraph target_graph = EdgeGraph::build(target_mesh);

  // Group edges by left endpoint: one source and one target solve per group.
  std::vector<std::size_t> group_begin;
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (i == 0 || edges[i].first != edges[i - 1].first) group_begin.push_back(i);

  std::vector<double> distortion(edges.size(), 0.0);
  bool disconnected = false;
  bool degenerate = false;

#pragma omp parallel
  {
    std::vector<double> ds, dt;
#pragma omp for schedule(dynamic)
    for (long long g = 0; g < static_cast<long long>(group_begin.size()); ++g) {
      const std::size_t begin = group_begin[static_cast<std::size_t>(g)];
      const std::size_t end = (static_cast<std::size_t>(g) + 1 < group_begin.size())
                                  ? group_begin[static_cast<std::size_t>(g) + 1]
                                  : edges.size();
      const int a = edges[begin].first;
      dijkstra(source_graph, a, ds);
      dijkstra(target_graph, map.target[static_cast<std::size_t>(a)], dt);
      for (std::size_t i = begin; i < end; ++i) {
        const int b = edges[i].second;
        const double gs = ds[static_cast<std::size_t>(b)];
        const double gt =
            dt[static_cast<std::size_t>(map.target[static_cast<std::size_t>(b)])];
        if (!std::isfinite(gs) || !std::isfinite(gt)) {
#pragma omp atomic write
          disconnected = true;
          continue;
        }
        if (gs == 0.0) {
#pragma omp atomic write
          degenerate = true;
          continue;
        }
        distortion[i] = std::abs(gt - gs) / gs;
      }
    }
  }
  if (disconnected)
    throw ValidationError(
        "mesh is disconnected: geodesic distances would be infinite");
  if (degenerate)
    throw ValidationError("zero-length source edge in distortion measure");

  DistortionSummary summary;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    summary.mean += distortion[i];
    summary.max = std::max(summary.max, distortion[i]);
  }
  summary.mean /= static_cast<double>(edges.size());
  return summary;
}

void save_vertex_map(const VertexMap& map, const std::filesystem::path& path) {
  json j;
  j["target"] = map.target;
  j["cost"] = map.cost;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

VertexMap load_vertex_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("target") || !j.contains("cost"))
    throw ValidationError(path.string() + ": map JSON needs target and cost");

  VertexMap map;
  map.target = j["target"].get<std::vector<int>>();
  map.cost = j["cost"].get<std::vector<double>>();
  if (map.target.size() != map.cost.size())
    throw ValidationError(path.string() + ": target and cost length mismatch");
  for (int t : map.target)
    if (t < 0)
      throw ValidationError(path.string() + ": negative target index");
  for (double c : map.cost)
    if (!std::isfinite(c) || c < 0.0)
      throw ValidationError(path.string() + ": costs must be finite and >= 0");
  return map;
}

}  // namespace meshpose
