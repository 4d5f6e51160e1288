#pragma once

#include <map>
#include <string>
#include <vector>

#include "artic/common.hpp"
#include "artic/num/rng.hpp"
#include "artic/num/tensor.hpp"

namespace artic::num {

// Named map of learnable tensors with matching gradient buffers.
// std::map keeps iteration order stable, which makes gradient reduction
// and optimizer sweeps deterministic.
template <typename Scalar>
class ParameterStore {
 public:
  struct Entry {
    Tensor<Scalar> value;
    Tensor<Scalar> grad;
    bool trainable = true;
  };

  Tensor<Scalar>& create(const std::string& path, std::vector<std::size_t> shape,
                         bool trainable = true) {
    if (entries_.count(path))
      throw DimensionError("ParameterStore: duplicate parameter path " + path);
    Entry e;
    e.value = Tensor<Scalar>(shape);
    e.grad = Tensor<Scalar>(shape);
    e.trainable = trainable;
    auto [it, ok] = entries_.emplace(path, std::move(e));
    (void)ok;
    return it->second.value;
  }

  Tensor<Scalar>& create_uniform(const std::string& path, std::vector<std::size_t> shape,
                                 Rng& rng, Scalar bound) {
    Tensor<Scalar>& t = create(path, std::move(shape));
    for (Eigen::Index i = 0; i < t.data().size(); ++i)
      t.data()(i) = static_cast<Scalar>(rng.uniform(-bound, bound));
    return t;
  }

  bool has(const std::string& path) const { return entries_.count(path) != 0; }

  Entry& at(const std::string& path) {
    auto it = entries_.find(path);
    if (it == entries_.end()) throw DimensionError("ParameterStore: unknown path " + path);
    return it->second;
  }
  const Entry& at(const std::string& path) const {
    auto it = entries_.find(path);
    if (it == entries_.end()) throw DimensionError("ParameterStore: unknown path " + path);
    return it->second;
  }

  Tensor<Scalar>& value(const std::string& path) { return at(path).value; }
  Tensor<Scalar>& grad(const std::string& path) { return at(path).grad; }

  void zero_grads() {
    for (auto& [path, e] : entries_) e.grad.data().setZero();
  }

  std::size_t size() const { return entries_.size(); }

  std::size_t scalar_count(bool trainable_only = false) const {
    std::size_t n = 0;
    for (const auto& [path, e] : entries_)
      if (!trainable_only || e.trainable) n += e.value.size();
    return n;
  }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void check_finite() const {
    for (const auto& [path, e] : entries_) e.value.check_finite(path);
  }

 private:
  std::map<std::string, Entry> entries_;
};

using ParameterStoreD = ParameterStore<double>;

}  // namespace artic::num
