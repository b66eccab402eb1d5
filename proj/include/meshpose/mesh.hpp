#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <vector>

#include "meshpose/defaults.hpp"

namespace meshpose {

using Vec3 = std::array<double, 3>;
using Face = std::array<int, 3>;

// Triangle surface. Vertex indices are 0-based internally; the OBJ loader
// converts from the 1-based file convention. Immutable after load.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
};

// Per-vertex semantic part labels. Labels are 1-based in 1..L and every
// part must own at least one vertex.
struct PartChart {
  int L = 0;
  std::vector<int> labels;

  // Vertex ids of part `part`, in ascending order.
  std::vector<int> part_vertices(int part) const;
};

// Chart-space surface coordinates: chart index c in 1..C, (u,v) in [0,1]^2.
struct ChartCoords {
  int c = 0;
  double u = 0.0;
  double v = 0.0;
};

// Sparse per-vertex coordinate table, keyed by vertex id. std::map keeps
// save order deterministic.
using ChartCoordTable = std::map<int, ChartCoords>;

struct Components {
  std::vector<int> component;  // per-vertex id, dense from 0
  int count = 0;
};

// Throw ValidationError unless the value satisfies every type invariant.
void validate_mesh(const TriMesh& mesh);
void validate_chart(const PartChart& chart, const TriMesh& mesh);
void validate_chart_coords(const ChartCoords& coords, int chart_count);

// Wavefront OBJ, v/f records only; polygons are fan-triangulated.
TriMesh load_mesh(const std::filesystem::path& path);
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path);

// Chart JSON: {"L": int, "labels": [int, ...]} with 1-based labels.
PartChart load_chart(const std::filesystem::path& path, const TriMesh& mesh);
void save_chart(const PartChart& chart, const std::filesystem::path& path);

// Coordinate table JSON: [{"vertex": int, "c": int, "u": f, "v": f}, ...].
ChartCoordTable load_chart_coords(const std::filesystem::path& path,
                                  int chart_count = defaults::chart_count);
void save_chart_coords(const ChartCoordTable& table,
                       const std::filesystem::path& path);

// Vertices share a component iff connected through face edges. Vertices
// referenced by no face are singleton components. Geodesic operations
// reject meshes with count > 1.
Components connected_components(const TriMesh& mesh);

}  // namespace meshpose
