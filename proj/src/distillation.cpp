#include "meshpose/distillation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "meshpose/errors.hpp"
#include "meshpose/tensor_io.hpp"

namespace meshpose {

namespace {

using nlohmann::json;

// splitmix64 finalizer; mixes (seed, id) into independent per-record streams.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t record_seed(std::uint64_t seed, std::int64_t id) {
  return mix64(seed) ^ mix64(static_cast<std::uint64_t>(id));
}

// Bias-free bounded draw; avoids std::uniform_int_distribution, whose
// output sequence is implementation-defined.
std::size_t bounded_draw(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t threshold = (0ull - bound) % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return static_cast<std::size_t>(r % bound);
  }
}

std::size_t pixel_count(const DetectionRecord& r) {
  return static_cast<std::size_t>(r.height) * static_cast<std::size_t>(r.width);
}

// Argmax over all channels at a pixel; ties keep the lowest channel.
int argmax_channel(const DetectionRecord& r, std::size_t pixel) {
  const std::size_t hw = pixel_count(r);
  int best = 0;
  double best_value = r.part_posterior[pixel];
  for (int c = 1; c < r.part_channels; ++c) {
    const double v = r.part_posterior[static_cast<std::size_t>(c) * hw + pixel];
    if (v > best_value) {
      best_value = v;
      best = c;
    }
  }
  return best;
}

double chart_max(const DetectionRecord& r, std::size_t pixel) {
  const std::size_t hw = pixel_count(r);
  double best = 0.0;
  for (int c = 1; c < r.part_channels; ++c)
    best = std::max(best, r.part_posterior[static_cast<std::size_t>(c) * hw + pixel]);
  return best;
}

double uv_uncertainty(const DetectionRecord& r, std::size_t pixel,
                      UvCombine combine) {
  const std::size_t hw = pixel_count(r);
  const double su = r.uv_sigma[pixel];
  const double sv = r.uv_sigma[hw + pixel];
  switch (combine) {
    case UvCombine::sum_var: return su * su + sv * sv;
    case UvCombine::max_var: return std::max(su * su, sv * sv);
    case UvCombine::mean_sigma: return 0.5 * (su + sv);
  }
  throw ValidationError("unknown uv combine mode");
}

PseudoLabel label_at(const DetectionRecord& r, std::size_t pixel, double score) {
  const std::size_t hw = pixel_count(r);
  PseudoLabel label;
  label.row = static_cast<int>(pixel / static_cast<std::size_t>(r.width));
  label.col = static_cast<int>(pixel % static_cast<std::size_t>(r.width));
  label.c = argmax_channel(r, pixel);
  label.u = r.uv[pixel];
  label.v = r.uv[hw + pixel];
  label.score = score;
  return label;
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& rel) {
  const std::filesystem::path p(rel);
  return p.is_absolute() ? p : base / p;
}

std::vector<double> load_pixel_tensor(const std::filesystem::path& path,
                                      std::size_t expected_rank) {
  const Tensor t = read_tensor(path);
  if (t.rank() != expected_rank)
    throw ValidationError(path.string() + ": expected rank " +
                          std::to_string(expected_rank) + ", got " +
                          std::to_string(t.rank()));
  if (t.dtype() == Dtype::i32)
    throw ValidationError(path.string() + ": pixel tensors must be f32 or f64");
  return t.to_f64();
}

}  // namespace

void validate_record(const DetectionRecord& record, double sigma_min) {
  if (!(record.box[0] < record.box[2]) || !(record.box[1] < record.box[3]))
    throw ValidationError("detection " + std::to_string(record.id) +
                          ": box must satisfy x0 < x1 and y0 < y1");
  if (!(record.score >= 0.0 && record.score <= 1.0))
    throw ValidationError("detection " + std::to_string(record.id) +
                          ": score outside [0,1]");
  if (record.height < 1 || record.width < 1)
    throw ValidationError("detection " + std::to_string(record.id) +
                          ": empty pixel grid");
  if (record.part_channels < 2)
    throw ValidationError("detection " + std::to_string(record.id) +
                          ": need at least background + one chart channel");

  const std::size_t hw = pixel_count(record);
  if (record.fg_posterior.size() != hw ||
      record.part_posterior.size() !=
          hw * static_cast<std::size_t>(record.part_channels) ||
      record.uv.size() != 2 * hw || record.uv_sigma.size() != 2 * hw)
    throw ValidationError("detection " + std::to_string(record.id) +
                          ": tensor shapes disagree with H x W grid");

  for (double v : record.fg_posterior)
    if (!(v >= 0.0 && v <= 1.0))
      throw ValidationError("detection " + std::to_string(record.id) +
                            ": fg posterior outside [0,1]");
  for (double v : record.uv)
    if (!(v >= 0.0 && v <= 1.0))
      throw ValidationError("detection " + std::to_string(record.id) +
                            ": uv value outside [0,1]");
  for (double s : record.uv_sigma)
    if (!(s >= sigma_min))
      throw ValidationError("detection " + std::to_string(record.id) +
                            ": uv_sigma below sigma_min");

  for (std::size_t pixel = 0; pixel < hw; ++pixel) {
    double sum = 0.0;
    for (int c = 0; c < record.part_channels; ++c) {
      const double v =
          record.part_posterior[static_cast<std::size_t>(c) * hw + pixel];
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("detection " + std::to_string(record.id) +
                              ": part posterior outside [0,1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-5)
      throw ValidationError("detection " + std::to_string(record.id) +
                            ": part posterior does not sum to 1 at pixel " +
                            std::to_string(pixel));
  }
}

Strategy parse_strategy(const std::string& tag) {
  if (tag == "uniform") return Strategy::uniform;
  if (tag == "mask") return Strategy::mask;
  if (tag == "part") return Strategy::part;
  if (tag == "uv") return Strategy::uv;
  throw ValidationError("unknown strategy '" + tag +
                        "' (expected uniform|mask|part|uv)");
}

std::string strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::uniform: return "uniform";
    case Strategy::mask: return "mask";
    case Strategy::part: return "part";
    case Strategy::uv: return "uv";
  }
  throw ValidationError("unknown strategy tag");
}

UvCombine parse_uv_combine(const std::string& tag) {
  if (tag == "sum_var") return UvCombine::sum_var;
  if (tag == "max_var") return UvCombine::max_var;
  if (tag == "mean_sigma") return UvCombine::mean_sigma;
  throw ValidationError("unknown uv combine '" + tag +
                        "' (expected sum_var|max_var|mean_sigma)");
}

std::string uv_combine_name(UvCombine combine) {
  switch (combine) {
    case UvCombine::sum_var: return "sum_var";
    case UvCombine::max_var: return "max_var";
    case UvCombine::mean_sigma: return "mean_sigma";
  }
  throw ValidationError("unknown uv combine mode");
}

std::vector<std::size_t> filter_detections(
    std::span<const DetectionRecord> records, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0))
    throw ValidationError("tau must lie in [0,1]");
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].score >= tau) kept.push_back(i);
  return kept;
}

PseudoLabelSet sample_pixels(const DetectionRecord& record, Strategy strategy,
                             int k, std::uint64_t seed, UvCombine combine) {
  if (k < 1) throw ValidationError("k must be >= 1");

  PseudoLabelSet set;
  set.detection_id = record.id;
  set.strategy = strategy;
  set.k = k;

  // candidate pool: pixels whose argmax channel is a chart, row-major order
  const std::size_t hw = pixel_count(record);
  std::vector<std::size_t> pool;
  for (std::size_t pixel = 0; pixel < hw; ++pixel)
    if (argmax_channel(record, pixel) != 0) pool.push_back(pixel);
  if (pool.empty()) return set;  // nothing labelable, not an error

  const std::size_t take = std::min(static_cast<std::size_t>(k), pool.size());

  if (strategy == Strategy::uniform) {
    std::mt19937_64 rng(seed);
    // partial Fisher-Yates: draw order is the output order
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + bounded_draw(rng, pool.size() - i);
      std::swap(pool[i], pool[j]);
      set.labels.push_back(label_at(record, pool[i], 1.0));
    }
    return set;
  }

  std::vector<std::pair<double, std::size_t>> ranked;  // (score, pixel)
  ranked.reserve(pool.size());
  for (std::size_t pixel : pool) {
    double score = 0.0;
    switch (strategy) {
      case Strategy::mask: score = record.fg_posterior[pixel]; break;
      case Strategy::part: score = chart_max(record, pixel); break;
      case Strategy::uv: score = -uv_uncertainty(record, pixel, combine); break;
      case Strategy::uniform: break;  // handled above
    }
    ranked.emplace_back(score, pixel);
  }
  // best score first, ties in row-major pixel order
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take),
                    ranked.end(), [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  for (std::size_t i = 0; i < take; ++i)
    set.labels.push_back(label_at(record, ranked[i].second, ranked[i].first));
  return set;
}

MiningResult build_dataset(std::span<const DetectionRecord> records,
                           Strategy strategy, int k, double tau,
                           std::uint64_t seed, UvCombine combine) {
  const std::vector<std::size_t> kept = filter_detections(records, tau);

  MiningResult result;
  result.sets.resize(kept.size());
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < static_cast<long long>(kept.size()); ++i) {
    const DetectionRecord& record = records[kept[static_cast<std::size_t>(i)]];
    result.sets[static_cast<std::size_t>(i)] = sample_pixels(
        record, strategy, k, record_seed(seed, record.id), combine);
  }

  result.manifest.strategy = strategy_name(strategy);
  result.manifest.k = k;
  result.manifest.tau = tau;
  result.manifest.seed = seed;
  result.manifest.detections_total = records.size();
  result.manifest.detections_kept = kept.size();
  for (const PseudoLabelSet& set : result.sets)
    result.manifest.labels_total += set.labels.size();
  return result;
}

std::vector<DetectionRecord> load_detection_manifest(
    const std::filesystem::path& path, double sigma_min) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("detections") || !j["detections"].is_array())
    throw ValidationError(path.string() + ": manifest needs a detections array");

  const std::filesystem::path base = path.parent_path();
  std::vector<DetectionRecord> records;
  for (const auto& d : j["detections"]) {
    if (!d.contains("id") || !d.contains("box") || !d.contains("score") ||
        !d.contains("tensors"))
      throw ValidationError(path.string() +
                            ": detection needs id, box, score, tensors");
    const auto& box = d["box"];
    if (!box.is_array() || box.size() != 4)
      throw ValidationError(path.string() + ": box must be [x0,y0,x1,y1]");
    const auto& tensors = d["tensors"];
    for (const char* key : {"fg", "part", "uv", "uv_sigma"})
      if (!tensors.contains(key))
        throw ValidationError(path.string() + ": tensors needs '" +
                              std::string(key) + "'");

    DetectionRecord record;
    record.id = d["id"].get<std::int64_t>();
    for (int i = 0; i < 4; ++i) record.box[i] = box[i].get<double>();
    record.score = d["score"].get<double>();

    const Tensor fg = read_tensor(resolve(base, tensors["fg"].get<std::string>()));
    if (fg.rank() != 2)
      throw ValidationError("fg tensor must be 2-D (H, W)");
    record.height = static_cast<int>(fg.shape()[0]);
    record.width = static_cast<int>(fg.shape()[1]);
    record.fg_posterior = fg.to_f64();

    const Tensor part =
        read_tensor(resolve(base, tensors["part"].get<std::string>()));
    if (part.rank() != 3)
      throw ValidationError("part tensor must be 3-D (K_I, H, W)");
    record.part_channels = static_cast<int>(part.shape()[0]);
    if (part.shape()[1] != fg.shape()[0] || part.shape()[2] != fg.shape()[1])
      throw ValidationError("part tensor grid disagrees with fg tensor");
    record.part_posterior = part.to_f64();

    for (const char* key : {"uv", "uv_sigma"}) {
      const Tensor t = read_tensor(resolve(base, tensors[key].get<std::string>()));
      if (t.rank() != 3 || t.shape()[0] != 2 || t.shape()[1] != fg.shape()[0] ||
          t.shape()[2] != fg.shape()[1])
        throw ValidationError(std::string(key) + " tensor must be (2, H, W)");
      (std::string(key) == "uv" ? record.uv : record.uv_sigma) = t.to_f64();
    }

    validate_record(record, sigma_min);
    records.push_back(std::move(record));
  }
  return records;
}

void save_detection_manifest(std::span<const DetectionRecord> records,
                             const std::filesystem::path& path) {
  const std::filesystem::path base = path.parent_path();
  json detections = json::array();
  for (const DetectionRecord& r : records) {
    const std::string stem = "det" + std::to_string(r.id);
    const std::size_t hw = pixel_count(r);
    const auto h = static_cast<std::uint64_t>(r.height);
    const auto w = static_cast<std::uint64_t>(r.width);
    const auto ki = static_cast<std::uint64_t>(r.part_channels);

    write_tensor(Tensor::f64({h, w}, r.fg_posterior), base / (stem + "_fg.dpt"));
    write_tensor(Tensor::f64({ki, h, w}, r.part_posterior),
                 base / (stem + "_part.dpt"));
    write_tensor(Tensor::f64({2, h, w}, r.uv), base / (stem + "_uv.dpt"));
    write_tensor(Tensor::f64({2, h, w}, r.uv_sigma),
                 base / (stem + "_uv_sigma.dpt"));
    (void)hw;

    detections.push_back(
        {{"id", r.id},
         {"box", {r.box[0], r.box[1], r.box[2], r.box[3]}},
         {"score", r.score},
         {"tensors",
          {{"fg", stem + "_fg.dpt"},
           {"part", stem + "_part.dpt"},
           {"uv", stem + "_uv.dpt"},
           {"uv_sigma", stem + "_uv_sigma.dpt"}}}});
  }
  json j;
  j["detections"] = detections;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void save_pseudo_labels(const MiningResult& result,
                        const std::filesystem::path& path) {
  json sets = json::array();
  for (const PseudoLabelSet& set : result.sets) {
    json labels = json::array();
    for (const PseudoLabel& l : set.labels)
      labels.push_back({{"row", l.row},
                        {"col", l.col},
                        {"c", l.c},
                        {"u", l.u},
                        {"v", l.v},
                        {"score", l.score}});
    sets.push_back({{"detection", set.detection_id},
                    {"strategy", strategy_name(set.strategy)},
                    {"k", set.k},
                    {"labels", labels}});
  }
  json j;
  j["manifest"] = {{"strategy", result.manifest.strategy},
                   {"k", result.manifest.k},
                   {"tau", result.manifest.tau},
                   {"seed", result.manifest.seed},
                   {"detections_total", result.manifest.detections_total},
                   {"detections_kept", result.manifest.detections_kept},
                   {"labels_total", result.manifest.labels_total}};
  j["sets"] = sets;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

MiningResult load_pseudo_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (!j.contains("manifest") || !j.contains("sets"))
    throw ValidationError(path.string() + ": needs manifest and sets");

  MiningResult result;
  const auto& m = j["manifest"];
  result.manifest.strategy = m.at("strategy").get<std::string>();
  result.manifest.k = m.at("k").get<int>();
  result.manifest.tau = m.at("tau").get<double>();
  result.manifest.seed = m.at("seed").get<std::uint64_t>();
  result.manifest.detections_total = m.at("detections_total").get<std::size_t>();
  result.manifest.detections_kept = m.at("detections_kept").get<std::size_t>();
  result.manifest.labels_total = m.at("labels_total").get<std::size_t>();

  for (const auto& s : j["sets"]) {
    PseudoLabelSet set;
    set.detection_id = s.at("detection").get<std::int64_t>();
    set.strategy = parse_strategy(s.at("strategy").get<std::string>());
    set.k = s.at("k").get<int>();
    for (const auto& l : s.at("labels")) {
      PseudoLabel label;
      label.row = l.at("row").get<int>();
      label.col = l.at("col").get<int>();
      label.c = l.at("c").get<int>();
      label.u = l.at("u").get<double>();
      label.v = l.at("v").get<double>();
      label.score = l.at("score").get<double>();
      set.labels.push_back(label);
    }
    result.sets.push_back(std::move(set));
  }
  return result;
}

}  // namespace meshpose
