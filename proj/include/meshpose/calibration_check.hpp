#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meshpose/defaults.hpp"

namespace meshpose {

struct CalibrationCheck {
  std::string name;
  bool pass = false;
  std::string detail;  // worst-case error or counterexample summary
};

// Self-contained property suite over the calibration math: softmax
// normalization, alpha = 0 uniformity, shift invariance, entropy
// monotonicity in alpha, argmax invariance, finite-difference gradient
// checks for both losses, the sigma = |error| minimizer, and clamp
// projection. Backs the `calib-check` subcommand.
std::vector<CalibrationCheck> run_calibration_checks(
    int instances = 1000, std::uint64_t seed = defaults::seed,
    double sigma_min = defaults::sigma_min);

}  // namespace meshpose
