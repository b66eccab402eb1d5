#include "meshpose/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "meshpose/errors.hpp"

namespace meshpose {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double edge_length(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void check_source(const TriMesh& mesh, int source) {
  if (source < 0 || source >= mesh.vertex_count())
    throw ValidationError("source vertex " + std::to_string(source) +
                          " out of range [0, " +
                          std::to_string(mesh.vertex_count()) + ")");
}

void check_reachable(const std::vector<double>& field) {
  for (double d : field)
    if (d == kInf)
      throw ValidationError(
          "mesh is disconnected: geodesic distances would be infinite");
}

std::vector<int> strided_sources(const PartChart& chart, int part, int stride) {
  if (part < 1 || part > chart.L)
    throw ValidationError("part " + std::to_string(part) + " outside 1.." +
                          std::to_string(chart.L));
  if (stride < 1)
    throw ValidationError("stride must be >= 1, got " + std::to_string(stride));
  const std::vector<int> all = chart.part_vertices(part);
  if (all.empty())
    throw ValidationError("part " + std::to_string(part) + " has no vertices");
  if (stride == 1) return all;
  std::vector<int> kept;
  for (std::size_t i = 0; i < all.size(); i += static_cast<std::size_t>(stride))
    kept.push_back(all[i]);
  return kept;
}

}  // namespace

EdgeGraph EdgeGraph::build(const TriMesh& mesh) {
  EdgeGraph graph;
  graph.adjacency.resize(mesh.vertices.size());
  for (const Face& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      const int a = f[e], b = f[(e + 1) % 3];
      graph.adjacency[a].emplace_back(b, 0.0);
      graph.adjacency[b].emplace_back(a, 0.0);
    }
  }
  for (std::size_t v = 0; v < graph.adjacency.size(); ++v) {
    auto& list = graph.adjacency[v];
    std::sort(list.begin(), list.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    list.erase(std::unique(list.begin(), list.end(),
                           [](const auto& x, const auto& y) {
                             return x.first == y.first;
                           }),
               list.end());
    for (auto& [neighbor, weight] : list)
      weight = edge_length(mesh.vertices[v], mesh.vertices[neighbor]);
  }
  return graph;
}

void dijkstra(const EdgeGraph& graph, int source, std::vector<double>& out) {
  const std::size_t n = graph.adjacency.size();
  out.assign(n, kInf);
  out[source] = 0.0;

  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  heap.emplace(0.0, source);

  while (!heap.empty()) {
    const auto [dist, u] = heap.top();
    heap.pop();
    if (dist > out[u]) continue;  // stale entry
    for (const auto& [v, w] : graph.adjacency[u]) {
      const double candidate = dist + w;
      if (candidate < out[v]) {
        out[v] = candidate;
        heap.emplace(candidate, v);
      }
    }
  }
}

DistanceField single_source_distance(const TriMesh& mesh, int source) {
  check_source(mesh, source);
  const EdgeGraph graph = EdgeGraph::build(mesh);
  DistanceField field;
  field.kind = DistanceField::SourceKind::Vertex;
  field.source = source;
  dijkstra(graph, source, field.distances);
  check_reachable(field.distances);
  return field;
}

DistanceField mean_distance_to_part(const TriMesh& mesh, const PartChart& chart,
                                    int part, int stride) {
  const std::vector<int> sources = strided_sources(chart, part, stride);
  const EdgeGraph graph = EdgeGraph::build(mesh);
  const std::size_t n = graph.adjacency.size();
  const std::size_t m = sources.size();

  DistanceField field;
  field.kind = DistanceField::SourceKind::Part;
  field.source = part;
  field.distances.assign(n, 0.0);
  double* acc = field.distances.data();

  // Solve sources in blocks; within a block each vertex adds the per-source
  // values in ascending source order, so the accumulation sequence is the
  // same no matter how many threads ran the solves.
  constexpr std::size_t kBlock = 64;
  std::vector<std::vector<double>> block_fields(std::min(kBlock, m));

  for (std::size_t begin = 0; begin < m; begin += kBlock) {
    const std::size_t count = std::min(kBlock, m - begin);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(count); ++i)
      dijkstra(graph, sources[begin + static_cast<std::size_t>(i)],
               block_fields[static_cast<std::size_t>(i)]);
    if (begin == 0) check_reachable(block_fields[0]);
#pragma omp parallel for schedule(static)
    for (long long p = 0; p < static_cast<long long>(n); ++p)
      for (std::size_t i = 0; i < count; ++i)
        acc[p] += block_fields[i][static_cast<std::size_t>(p)];
  }

  const double inv = 1.0 / static_cast<double>(m);
  for (std::size_t p = 0; p < n; ++p) acc[p] *= inv;
  return field;
}

DistanceField mean_distance_to_part_serial(const TriMesh& mesh,
                                           const PartChart& chart, int part,
                                           int stride) {
  const std::vector<int> sources = strided_sources(chart, part, stride);
  const EdgeGraph graph = EdgeGraph::build(mesh);
  const std::size_t n = graph.adjacency.size();

  DistanceField field;
  field.kind = DistanceField::SourceKind::Part;
  field.source = part;
  field.distances.assign(n, 0.0);

  std::vector<double> buffer;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    dijkstra(graph, sources[i], buffer);
    if (i == 0) check_reachable(buffer);
    for (std::size_t p = 0; p < n; ++p) field.distances[p] += buffer[p];
  }
  const double inv = 1.0 / static_cast<double>(sources.size());
  for (std::size_t p = 0; p < n; ++p) field.distances[p] *= inv;
  return field;
}

}  // namespace meshpose
