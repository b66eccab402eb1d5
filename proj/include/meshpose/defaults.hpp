#pragma once

#include <cstdint>

// Toolkit-wide default knobs. Every CLI flag that feeds a module contract
// takes its default from here so library and CLI cannot drift apart.
namespace meshpose::defaults {

inline constexpr int part_count = 32;      // L: semantic parts per mesh chart
inline constexpr int chart_count = 24;     // C: densepose charts for (c,u,v)
inline constexpr int part_channels = 25;   // K_I: chart channels + background
inline constexpr double sigma_min = 0.01;  // lower clamp on predicted sigma
inline constexpr double tau = 0.5;         // detection score threshold
inline constexpr int top_k = 5;            // pseudo-labels per detection
inline constexpr std::uint64_t seed = 0;
inline constexpr int source_stride = 1;    // geodesic source subsampling (1 = off)

}  // namespace meshpose::defaults
