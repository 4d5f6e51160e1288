#pragma once

#include <string>

#include "artic/corpus/types.hpp"

namespace artic::corpus {

// Trajectory CSV: header `time_s,UL_x,...,TD_y`, one row per frame, seconds
// and UTF-8 throughout. Written values round-trip exactly.
void save_trajectory(const ArticulatoryTrajectory& traj, const std::string& path);
ArticulatoryTrajectory load_trajectory(const std::string& path);

// Alignment label file: `start_s end_s phoneme` per line.
void save_alignment(const PhonemeAlignment& alignment, const std::string& path);
PhonemeAlignment load_alignment(const std::string& path);

// Frame-synchronous acoustic proxy CSV: header `time_s,a00..a12`.
void save_proxy(const MatX& proxy, double frame_rate_hz, const std::string& path);
MatX load_proxy(const std::string& path);

}  // namespace artic::corpus
