#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "artic/common.hpp"

namespace artic::num {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatX = Mat<double>;
using VecX = Vec<double>;

// Dense N-d value: a shape plus flat column-major storage (first index
// fastest). Everything heavier than bookkeeping is done through the 2-D
// Eigen views below.
template <typename Scalar>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(Vec<Scalar>::Zero(count(shape_))) {}

  Tensor(std::vector<std::size_t> shape, Vec<Scalar> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<std::size_t>(data_.size()) != count(shape_))
      throw DimensionError("Tensor: data length does not match shape product");
  }

  static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

  static Tensor from_matrix(const Mat<Scalar>& m) {
    Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    t.mat() = m;
    return t;
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return static_cast<std::size_t>(data_.size()); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }

  Vec<Scalar>& data() { return data_; }
  const Vec<Scalar>& data() const { return data_; }

  // 2-D view: rows = product of the first `split` dims, cols = the rest.
  // Column-major flat layout makes this a plain reinterpret.
  Eigen::Map<Mat<Scalar>> view2d(std::size_t split) {
    auto [r, c] = split_dims(split);
    return Eigen::Map<Mat<Scalar>>(data_.data(), r, c);
  }
  Eigen::Map<const Mat<Scalar>> view2d(std::size_t split) const {
    auto [r, c] = split_dims(split);
    return Eigen::Map<const Mat<Scalar>>(data_.data(), r, c);
  }

  // Matrix view for rank <= 2 tensors; vectors map to n x 1.
  Eigen::Map<Mat<Scalar>> mat() { return view2d(rank() >= 1 ? 1 : 0); }
  Eigen::Map<const Mat<Scalar>> mat() const { return view2d(rank() >= 1 ? 1 : 0); }

  bool all_finite() const { return data_.allFinite(); }

  void check_finite(const std::string& what) const {
    if (!all_finite()) throw NumericError("non-finite values in " + what);
  }

  static std::size_t count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
  }

 private:
  std::pair<Eigen::Index, Eigen::Index> split_dims(std::size_t split) const {
    std::size_t r = 1, c = 1;
    for (std::size_t i = 0; i < shape_.size(); ++i) (i < split ? r : c) *= shape_[i];
    return {static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)};
  }

  std::vector<std::size_t> shape_;
  Vec<Scalar> data_;
};

using TensorD = Tensor<double>;

}  // namespace artic::num
