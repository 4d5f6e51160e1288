#pragma once

#include <algorithm>
#include <map>
#include <string>

#include "artic/num/param_store.hpp"

namespace artic::num {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
};

// Central-difference check of the analytic gradients produced by `loss_fn`.
//
// loss_fn(bool with_grad) must evaluate the same deterministic loss each
// call; with_grad=true additionally accumulates gradients into `params`.
// The relative error is computed per named parameter tensor as
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8) in the Euclidean
// norm; the maximum over parameters is returned.
template <typename LossFn>
GradCheckReport grad_check(LossFn&& loss_fn, ParameterStore<double>& params, double epsilon) {
  params.zero_grads();
  const double base = loss_fn(true);
  const double again = loss_fn(false);
  if (base != again) throw NumericError("grad_check: loss function is not deterministic");

  std::map<std::string, VecX> analytic;
  for (auto& [path, entry] : params)
    if (entry.trainable) analytic.emplace(path, entry.grad.data());

  GradCheckReport report;
  for (auto& [path, entry] : params) {
    if (!entry.trainable) continue;
    VecX numeric(entry.value.data().size());
    for (Eigen::Index i = 0; i < numeric.size(); ++i) {
      const double original = entry.value.data()(i);
      entry.value.data()(i) = original + epsilon;
      const double up = loss_fn(false);
      entry.value.data()(i) = original - epsilon;
      const double down = loss_fn(false);
      entry.value.data()(i) = original;
      numeric(i) = (up - down) / (2.0 * epsilon);
    }
    const VecX& a = analytic.at(path);
    const double rel =
        (a - numeric).norm() / std::max({a.norm(), numeric.norm(), 1e-8});
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_param = path;
    }
  }
  return report;
}

}  // namespace artic::num
