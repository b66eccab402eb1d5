#include "meshpose/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "meshpose/errors.hpp"

namespace meshpose {

namespace {

using nlohmann::json;

json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

double edge_length_sq(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line,
                             const std::string& what) {
  throw ValidationError(path.string() + ":" + std::to_string(line) + ": " + what);
}

// OBJ face tokens look like "7", "7/1", or "7/1/3"; only the vertex index
// in front of the first slash matters here.
int parse_face_index(const std::string& token, const std::filesystem::path& path,
                     int line) {
  const std::string head = token.substr(0, token.find('/'));
  char* end = nullptr;
  const long value = std::strtol(head.c_str(), &end, 10);
  if (end == head.c_str() || *end != '\0')
    parse_fail(path, line, "malformed face index '" + token + "'");
  if (value < 1)
    parse_fail(path, line, "face index must be positive (1-based), got " +
                               std::to_string(value));
  return static_cast<int>(value - 1);
}

double parse_coord(const std::string& token, const std::filesystem::path& path,
                   int line) {
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0')
    parse_fail(path, line, "malformed coordinate '" + token + "'");
  return value;
}

// Unweighted vertex adjacency from face edges, neighbor lists sorted.
std::vector<std::vector<int>> vertex_adjacency(const TriMesh& mesh) {
  std::vector<std::vector<int>> adj(mesh.vertices.size());
  for (const Face& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      const int a = f[e], b = f[(e + 1) % 3];
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

}  // namespace

std::vector<int> PartChart::part_vertices(int part) const {
  std::vector<int> out;
  for (std::size_t v = 0; v < labels.size(); ++v)
    if (labels[v] == part) out.push_back(static_cast<int>(v));
  return out;
}

void validate_mesh(const TriMesh& mesh) {
  if (mesh.vertices.size() < 3)
    throw ValidationError("mesh needs at least 3 vertices, got " +
                          std::to_string(mesh.vertices.size()));
  if (mesh.faces.empty()) throw ValidationError("mesh has no faces");

  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    for (double coord : mesh.vertices[v])
      if (!std::isfinite(coord))
        throw ValidationError("non-finite coordinate at vertex " +
                              std::to_string(v));

  const int n = mesh.vertex_count();
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const Face& f = mesh.faces[i];
    for (int idx : f)
      if (idx < 0 || idx >= n)
        throw ValidationError("face " + std::to_string(i) +
                              " references vertex " + std::to_string(idx) +
                              " out of range [0, " + std::to_string(n) + ")");
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
      throw ValidationError("face " + std::to_string(i) +
                            " repeats a vertex index");
    for (int e = 0; e < 3; ++e) {
      const double l2 =
          edge_length_sq(mesh.vertices[f[e]], mesh.vertices[f[(e + 1) % 3]]);
      if (!(l2 > 0.0) || !std::isfinite(l2))
        throw ValidationError("face " + std::to_string(i) +
                              " has a zero-length or non-finite edge");
    }
  }
}

void validate_chart(const PartChart& chart, const TriMesh& mesh) {
  if (chart.L < 1)
    throw ValidationError("chart part count L must be >= 1, got " +
                          std::to_string(chart.L));
  if (chart.labels.size() != mesh.vertices.size())
    throw ValidationError("chart has " + std::to_string(chart.labels.size()) +
                          " labels for " + std::to_string(mesh.vertices.size()) +
                          " vertices");
  std::vector<int> counts(static_cast<std::size_t>(chart.L) + 1, 0);
  for (std::size_t v = 0; v < chart.labels.size(); ++v) {
    const int l = chart.labels[v];
    if (l < 1 || l > chart.L)
      throw ValidationError("label " + std::to_string(l) + " at vertex " +
                            std::to_string(v) + " outside 1.." +
                            std::to_string(chart.L));
    ++counts[l];
  }
  for (int l = 1; l <= chart.L; ++l)
    if (counts[l] == 0)
      throw ValidationError("part " + std::to_string(l) + " has no vertices");
}

void validate_chart_coords(const ChartCoords& coords, int chart_count) {
  if (coords.c < 1 || coords.c > chart_count)
    throw ValidationError("chart index " + std::to_string(coords.c) +
                          " outside 1.." + std::to_string(chart_count));
  if (!(coords.u >= 0.0 && coords.u <= 1.0) ||
      !(coords.v >= 0.0 && coords.v <= 1.0))
    throw ValidationError("uv coordinates must lie in [0,1]");
}

TriMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());

  TriMesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;

    if (tag == "v") {
      std::vector<std::string> tokens;
      std::string tok;
      while (ss >> tok) tokens.push_back(tok);
      if (tokens.size() < 3)
        parse_fail(path, line_no, "vertex record needs 3 coordinates");
      Vec3 p;
      for (int i = 0; i < 3; ++i) p[i] = parse_coord(tokens[i], path, line_no);
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> indices;
      std::string tok;
      while (ss >> tok) indices.push_back(parse_face_index(tok, path, line_no));
      if (indices.size() < 3)
        parse_fail(path, line_no, "face record needs at least 3 indices");
      // polygons become a fan around the first vertex
      for (std::size_t i = 1; i + 1 < indices.size(); ++i)
        mesh.faces.push_back({indices[0], indices[i], indices[i + 1]});
    }
    // vt, vn, o, g, s, usemtl, mtllib and friends are ignored
  }
  if (in.bad()) throw IoError("read failed: " + path.string());

  validate_mesh(mesh);
  return mesh;
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  char buf[128];
  for (const Vec3& p : mesh.vertices) {
    // %.17g round-trips doubles exactly
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", p[0], p[1], p[2]);
    out << buf;
  }
  for (const Face& f : mesh.faces)
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

PartChart load_chart(const std::filesystem::path& path, const TriMesh& mesh) {
  const json j = parse_json_file(path);
  if (!j.is_object() || !j.contains("L") || !j.contains("labels"))
    throw ValidationError(path.string() + ": chart JSON needs L and labels");
  if (!j["L"].is_number_integer() || !j["labels"].is_array())
    throw ValidationError(path.string() + ": L must be int, labels an array");

  PartChart chart;
  chart.L = j["L"].get<int>();
  chart.labels.reserve(j["labels"].size());
  for (const auto& entry : j["labels"]) {
    if (!entry.is_number_integer())
      throw ValidationError(path.string() + ": labels must be integers");
    chart.labels.push_back(entry.get<int>());
  }
  validate_chart(chart, mesh);
  return chart;
}

void save_chart(const PartChart& chart, const std::filesystem::path& path) {
  json j;
  j["L"] = chart.L;
  j["labels"] = chart.labels;
  write_json_file(j, path);
}

ChartCoordTable load_chart_coords(const std::filesystem::path& path,
                                  int chart_count) {
  const json j = parse_json_file(path);
  if (!j.is_array())
    throw ValidationError(path.string() + ": chart-coords JSON must be an array");

  ChartCoordTable table;
  for (const auto& entry : j) {
    if (!entry.is_object() || !entry.contains("vertex") || !entry.contains("c") ||
        !entry.contains("u") || !entry.contains("v"))
      throw ValidationError(path.string() +
                            ": entries need vertex, c, u, v fields");
    const int vertex = entry["vertex"].get<int>();
    if (vertex < 0)
      throw ValidationError(path.string() + ": negative vertex id");
    ChartCoords coords;
    coords.c = entry["c"].get<int>();
    coords.u = entry["u"].get<double>();
    coords.v = entry["v"].get<double>();
    validate_chart_coords(coords, chart_count);
    if (!table.emplace(vertex, coords).second)
      throw ValidationError(path.string() + ": duplicate entry for vertex " +
                            std::to_string(vertex));
  }
  return table;
}

void save_chart_coords(const ChartCoordTable& table,
                       const std::filesystem::path& path) {
  json j = json::array();
  for (const auto& [vertex, coords] : table) {
    j.push_back({{"vertex", vertex},
                 {"c", coords.c},
                 {"u", coords.u},
                 {"v", coords.v}});
  }
  write_json_file(j, path);
}

Components connected_components(const TriMesh& mesh) {
  const auto adj = vertex_adjacency(mesh);
  Components result;
  result.component.assign(mesh.vertices.size(), -1);

  for (std::size_t start = 0; start < mesh.vertices.size(); ++start) {
    if (result.component[start] >= 0) continue;
    const int id = result.count++;
    std::queue<int> frontier;
    frontier.push(static_cast<int>(start));
    result.component[start] = id;
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      for (int v : adj[u])
        if (result.component[v] < 0) {
          result.component[v] = id;
          frontier.push(v);
        }
    }
  }
  return result;
}

}  // namespace meshpose
