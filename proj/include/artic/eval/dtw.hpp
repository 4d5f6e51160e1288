#pragma once

#include <utility>
#include <vector>

#include "artic/num/tensor.hpp"

namespace artic::eval {

using num::MatX;

struct DtwResult {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> path;  // (i into a, j into b)
  double cost = 0.0;
};

// Minimal-cost monotone alignment between two frame sequences (rows are
// frames) under the Euclidean local distance over all channels jointly.
// Steps are (1,0), (0,1), (1,1); the path runs (0,0) .. (Ta-1, Tb-1).
DtwResult dtw_align(const MatX& a, const MatX& b);

// Map two sequences through a DTW path by index duplication.
std::pair<MatX, MatX> apply_dtw_path(const MatX& a, const MatX& b, const DtwResult& dtw);

}  // namespace artic::eval
