#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "meshpose/mesh.hpp"

namespace meshpose {

// Per-vertex semantic descriptor: row p, column l holds the mean geodesic
// distance from vertex p to part l (normalized by the part average once
// normalize_descriptors has run). Row-major V x L.
struct DescriptorField {
  int L = 0;
  std::size_t vertex_count = 0;
  bool normalized = false;
  std::vector<double> values;

  double at(std::size_t vertex, int column) const {
    return values[vertex * static_cast<std::size_t>(L) + column];
  }
  const double* row(std::size_t vertex) const {
    return values.data() + vertex * static_cast<std::size_t>(L);
  }
};

// Column l = mean distance field of part l. Parallel over geodesic sources;
// output bitwise independent of thread count.
DescriptorField compute_descriptors(const TriMesh& mesh, const PartChart& chart,
                                    int stride = 1);

// Serial reference, bitwise-identical to compute_descriptors.
DescriptorField compute_descriptors_serial(const TriMesh& mesh,
                                           const PartChart& chart,
                                           int stride = 1);

// Divide every column by its mean over the part's own vertices. A zero
// part average (singleton part) is a hard error: the chart cannot be used
// for matching.
DescriptorField normalize_descriptors(const DescriptorField& field,
                                      const PartChart& chart);

// Binary tensor (f64, shape V x L) plus a JSON sidecar at <path>.json
// recording {L, vertex_count, normalized}.
void save_descriptors(const DescriptorField& field,
                      const std::filesystem::path& path);
DescriptorField load_descriptors(const std::filesystem::path& path);

}  // namespace meshpose
