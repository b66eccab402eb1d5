#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "meshpose/defaults.hpp"

namespace meshpose {

// One teacher detection, as read from disk. Pixel tensors are row-major
// over an H x W grid covering the box; part channels are channel-major
// (channel * H * W + row * W + col) with channel 0 = background and
// channels 1..K_I-1 the charts.
struct DetectionRecord {
  std::int64_t id = 0;
  double box[4] = {0, 0, 0, 0};  // x0, y0, x1, y1 in pixels
  double score = 0.0;            // calibrated detection confidence
  int height = 0;
  int width = 0;
  int part_channels = defaults::part_channels;  // K_I
  std::vector<double> fg_posterior;             // H*W, in [0,1]
  std::vector<double> part_posterior;           // K_I*H*W, sums to 1 per pixel
  std::vector<double> uv;                       // 2*H*W, in [0,1]
  std::vector<double> uv_sigma;                 // 2*H*W, >= sigma_min
};

void validate_record(const DetectionRecord& record,
                     double sigma_min = defaults::sigma_min);

enum class Strategy { uniform, mask, part, uv };

Strategy parse_strategy(const std::string& tag);
std::string strategy_name(Strategy strategy);

// How the uv strategy combines the two per-pixel sigmas into one ranking
// key (ranked ascending). Default is the sum of variances.
enum class UvCombine { sum_var, max_var, mean_sigma };

UvCombine parse_uv_combine(const std::string& tag);
std::string uv_combine_name(UvCombine combine);

struct PseudoLabel {
  int row = 0;
  int col = 0;
  int c = 0;   // chart id, 1..K_I-1
  double u = 0.0;
  double v = 0.0;
  double score = 0.0;  // selection score, non-increasing in output order
};

// Selection for one detection.
struct PseudoLabelSet {
  std::int64_t detection_id = 0;
  Strategy strategy = Strategy::uniform;
  int k = 0;
  std::vector<PseudoLabel> labels;
};

// Indices (into `records`) of detections with score >= tau, order preserved.
std::vector<std::size_t> filter_detections(std::span<const DetectionRecord> records,
                                           double tau);

// Candidate pool = pixels whose part argmax is a chart, not background.
// uniform draws k pool pixels without replacement from a seeded generator;
// mask/part/uv take the top k by foreground posterior, best chart
// posterior, or ascending combined uv variance. Ties break in row-major
// pixel order. An empty pool yields an empty set.
PseudoLabelSet sample_pixels(const DetectionRecord& record, Strategy strategy,
                             int k, std::uint64_t seed,
                             UvCombine combine = UvCombine::sum_var);

struct MiningManifest {
  std::string strategy;
  int k = 0;
  double tau = 0.0;
  std::uint64_t seed = 0;
  std::size_t detections_total = 0;
  std::size_t detections_kept = 0;
  std::size_t labels_total = 0;
};

struct MiningResult {
  std::vector<PseudoLabelSet> sets;  // in surviving-record order
  MiningManifest manifest;
};

// filter_detections then sample_pixels per surviving record. Records are
// processed in parallel; per-record generator streams are derived from
// (seed, detection id) so the output is bitwise deterministic.
MiningResult build_dataset(std::span<const DetectionRecord> records,
                           Strategy strategy, int k, double tau,
                           std::uint64_t seed,
                           UvCombine combine = UvCombine::sum_var);

// Detection manifest JSON, tensor paths resolved relative to the manifest:
// {"detections": [{"id", "box": [x0,y0,x1,y1], "score",
//                  "tensors": {"fg","part","uv","uv_sigma"}}, ...]}
std::vector<DetectionRecord> load_detection_manifest(
    const std::filesystem::path& path, double sigma_min = defaults::sigma_min);
void save_detection_manifest(std::span<const DetectionRecord> records,
                             const std::filesystem::path& path);

// Pseudo-label output: {"manifest": {...}, "sets": [...]}.
void save_pseudo_labels(const MiningResult& result,
                        const std::filesystem::path& path);
MiningResult load_pseudo_labels(const std::filesystem::path& path);

}  // namespace meshpose
