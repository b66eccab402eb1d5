#include "meshpose/descriptors.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "meshpose/errors.hpp"
#include "meshpose/geodesics.hpp"
#include "meshpose/tensor_io.hpp"

namespace meshpose {

namespace {

using nlohmann::json;

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

template <typename MeanFn>
DescriptorField build_field(const TriMesh& mesh, const PartChart& chart,
                            int stride, MeanFn mean_distance) {
  validate_mesh(mesh);
  validate_chart(chart, mesh);

  DescriptorField field;
  field.L = chart.L;
  field.vertex_count = mesh.vertices.size();
  field.normalized = false;
  field.values.assign(field.vertex_count * static_cast<std::size_t>(chart.L),
                      0.0);
  for (int part = 1; part <= chart.L; ++part) {
    const DistanceField column = mean_distance(mesh, chart, part, stride);
    for (std::size_t p = 0; p < field.vertex_count; ++p)
      field.values[p * static_cast<std::size_t>(chart.L) + (part - 1)] =
          column.distances[p];
  }
  return field;
}

}  // namespace

DescriptorField compute_descriptors(const TriMesh& mesh, const PartChart& chart,
                                    int stride) {
  return build_field(mesh, chart, stride, mean_distance_to_part);
}

DescriptorField compute_descriptors_serial(const TriMesh& mesh,
                                           const PartChart& chart, int stride) {
  return build_field(mesh, chart, stride, mean_distance_to_part_serial);
}

DescriptorField normalize_descriptors(const DescriptorField& field,
                                      const PartChart& chart) {
  if (field.normalized)
    throw ValidationError("descriptor field is already normalized");
  if (field.L != chart.L)
    throw ValidationError("descriptor field has L=" + std::to_string(field.L) +
                          ", chart has L=" + std::to_string(chart.L));
  if (chart.labels.size() != field.vertex_count)
    throw ValidationError("chart labels do not match descriptor rows");

  DescriptorField out = field;
  const std::size_t L = static_cast<std::size_t>(field.L);
  for (int part = 1; part <= chart.L; ++part) {
    const std::vector<int> members = chart.part_vertices(part);
    double sum = 0.0;
    for (int q : members) sum += field.at(static_cast<std::size_t>(q), part - 1);
    const double average = sum / static_cast<double>(members.size());
    if (average == 0.0)
      throw ValidationError("degenerate part " + std::to_string(part) +
                            ": zero part-average descriptor");
    const double inv = 1.0 / average;
    for (std::size_t p = 0; p < field.vertex_count; ++p)
      out.values[p * L + static_cast<std::size_t>(part - 1)] *= inv;
  }
  out.normalized = true;
  return out;
}

void save_descriptors(const DescriptorField& field,
                      const std::filesystem::path& path) {
  const Tensor tensor = Tensor::f64(
      {field.vertex_count, static_cast<std::uint64_t>(field.L)}, field.values);
  write_tensor(tensor, path);

  json sidecar;
  sidecar["L"] = field.L;
  sidecar["vertex_count"] = field.vertex_count;
  sidecar["normalized"] = field.normalized;
  std::ofstream out(sidecar_path(path), std::ios::trunc);
  if (!out)
    throw IoError("cannot open for writing: " + sidecar_path(path).string());
  out << sidecar.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + sidecar_path(path).string());
}

DescriptorField load_descriptors(const std::filesystem::path& path) {
  const Tensor tensor = read_tensor(path);
  if (tensor.rank() != 2)
    throw ValidationError("descriptor tensor must be 2-D, got rank " +
                          std::to_string(tensor.rank()));

  std::ifstream in(sidecar_path(path));
  if (!in) throw IoError("cannot open: " + sidecar_path(path).string());
  json sidecar;
  try {
    sidecar = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(sidecar_path(path).string() + ": " + e.what());
  }
  if (!sidecar.contains("L") || !sidecar.contains("vertex_count") ||
      !sidecar.contains("normalized"))
    throw ValidationError(sidecar_path(path).string() +
                          ": sidecar needs L, vertex_count, normalized");

  DescriptorField field;
  field.L = sidecar["L"].get<int>();
  field.vertex_count = sidecar["vertex_count"].get<std::size_t>();
  field.normalized = sidecar["normalized"].get<bool>();
  if (field.L < 1) throw ValidationError("sidecar L must be >= 1");
  if (tensor.shape()[0] != field.vertex_count ||
      tensor.shape()[1] != static_cast<std::uint64_t>(field.L))
    throw ValidationError("descriptor tensor shape disagrees with sidecar");
  field.values = tensor.to_f64();
  for (double v : field.values)
    if (!std::isfinite(v) || v < 0.0)
      throw ValidationError("descriptor entries must be finite and >= 0");
  return field;
}

}  // namespace meshpose
