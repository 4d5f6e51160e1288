#pragma once

#include <string>
#include <vector>

#include "artic/corpus/types.hpp"

namespace artic::cli {

using corpus::MatX;

// Ground-truth vs predicted channels over time with phoneme boundaries.
// channels are indices into the 12-channel order; both matrices are frame
// rows and may have different lengths.
std::string trajectory_svg(const MatX& truth, const MatX& predicted,
                           const corpus::PhonemeAlignment& alignment,
                           const std::vector<int>& channels, double frame_rate_hz);

// Attention weight heat map (decoder frames x tokens) with token labels.
std::string attention_svg(const MatX& alphas, const std::vector<std::string>& labels);

}  // namespace artic::cli
