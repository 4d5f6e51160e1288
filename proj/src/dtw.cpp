#include "artic/eval/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "artic/common.hpp"

namespace artic::eval {

DtwResult dtw_align(const MatX& a, const MatX& b) {
  const Eigen::Index Ta = a.rows(), Tb = b.rows();
  if (Ta == 0 || Tb == 0) throw DimensionError("dtw_align: empty input sequence");
  if (a.cols() != b.cols()) throw DimensionError("dtw_align: channel count mismatch");

  MatX dist(Ta, Tb);
  for (Eigen::Index i = 0; i < Ta; ++i)
    for (Eigen::Index j = 0; j < Tb; ++j) dist(i, j) = (a.row(i) - b.row(j)).norm();

  const double inf = std::numeric_limits<double>::infinity();
  MatX acc(Ta, Tb);
  // 0 = diagonal, 1 = up (advance a), 2 = left (advance b); diagonal wins ties
  Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> from(Ta, Tb);
  for (Eigen::Index i = 0; i < Ta; ++i)
    for (Eigen::Index j = 0; j < Tb; ++j) {
      const double diag = (i > 0 && j > 0) ? acc(i - 1, j - 1) : (i == 0 && j == 0 ? 0.0 : inf);
      const double up = i > 0 ? acc(i - 1, j) : inf;
      const double left = j > 0 ? acc(i, j - 1) : inf;
      double best = diag;
      std::int8_t arg = 0;
      if (up < best) {
        best = up;
        arg = 1;
      }
      if (left < best) {
        best = left;
        arg = 2;
      }
      acc(i, j) = dist(i, j) + best;
      from(i, j) = arg;
    }

  DtwResult out;
  out.cost = acc(Ta - 1, Tb - 1);
  Eigen::Index i = Ta - 1, j = Tb - 1;
  out.path.push_back({i, j});
  while (i > 0 || j > 0) {
    switch (from(i, j)) {
      case 0: --i; --j; break;
      case 1: --i; break;
      default: --j; break;
    }
    out.path.push_back({i, j});
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

std::pair<MatX, MatX> apply_dtw_path(const MatX& a, const MatX& b, const DtwResult& dtw) {
  const auto n = static_cast<Eigen::Index>(dtw.path.size());
  MatX aa(n, a.cols()), bb(n, b.cols());
  for (Eigen::Index k = 0; k < n; ++k) {
    aa.row(k) = a.row(dtw.path[static_cast<std::size_t>(k)].first);
    bb.row(k) = b.row(dtw.path[static_cast<std::size_t>(k)].second);
  }
  return {aa, bb};
}

}  // namespace artic::eval
