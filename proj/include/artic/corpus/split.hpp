#pragma once

#include <array>

#include "artic/corpus/types.hpp"

namespace artic::corpus {

// Deterministic, per-subject stratified train/validation/test assignment.
// Counts per subject: round(r0*n), round(r1*n), remainder.
std::map<std::string, Split> split_dataset(const Corpus& corpus,
                                           std::array<double, 3> ratios,
                                           std::uint64_t seed);

inline constexpr std::array<double, 3> kDefaultSplitRatios = {0.8, 0.1, 0.1};

}  // namespace artic::corpus
