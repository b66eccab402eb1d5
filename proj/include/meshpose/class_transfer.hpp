#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace meshpose {

// Per-class transfer scores (instance segmentation AP of single-class
// teachers on the target data). Scores are inputs, never computed here.
struct ClassScore {
  std::string name;
  double ap = 0.0;
};

struct ClassScoreTable {
  std::vector<ClassScore> entries;
};

void validate_class_table(const ClassScoreTable& table);

// Descending by score, ties ascending by name.
std::vector<std::string> rank_classes(const ClassScoreTable& table);

// First n of the ranked list. 1 <= n <= length.
std::vector<std::string> top_n_subset(const std::vector<std::string>& ranked,
                                      int n);

// {"classes": [{"name": str, "ap": float}, ...]}
ClassScoreTable load_class_table(const std::filesystem::path& path);
void save_class_table(const ClassScoreTable& table,
                      const std::filesystem::path& path);

// {"subset": [str, ...], "n": int}
void save_subset_manifest(const std::vector<std::string>& subset,
                          const std::filesystem::path& path);
std::vector<std::string> load_subset_manifest(const std::filesystem::path& path);

}  // namespace meshpose
