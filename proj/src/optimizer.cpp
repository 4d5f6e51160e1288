#include "artic/train/optimizer.hpp"

#include <cmath>

namespace artic::train {

Adam::Adam(num::ParameterStoreD& params, AdamConfig cfg) : params_(params), cfg_(cfg) {
  for (const auto& [path, entry] : params_) {
    if (!entry.trainable) continue;
    m_[path] = num::VecX::Zero(entry.value.data().size());
    v_[path] = num::VecX::Zero(entry.value.data().size());
  }
}

void Adam::step() {
  double sq_norm = 0.0;
  for (const auto& [path, entry] : params_)
    if (entry.trainable) sq_norm += entry.grad.data().squaredNorm();
  const double norm = std::sqrt(sq_norm);
  const double scale = (cfg_.clip_norm > 0.0 && norm > cfg_.clip_norm)
                           ? cfg_.clip_norm / norm
                           : 1.0;

  ++steps_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  const double bound = cfg_.lr * (cfg_.clip_norm > 0.0 ? cfg_.clip_norm : 1.0);

  for (auto& [path, entry] : params_) {
    if (!entry.trainable) continue;
    auto& m = m_.at(path);
    auto& v = v_.at(path);
    const num::VecX g = entry.grad.data() * scale;
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    num::VecX update =
        (cfg_.lr * (m / bc1).array() / ((v / bc2).array().sqrt() + cfg_.eps)).matrix();
    update = update.array().min(bound).max(-bound).matrix();
    entry.value.data() -= update;
  }
}

void Adam::save_state(num::Container& c, const std::string& prefix) const {
  c.meta["adam_steps"] = steps_;
  for (const auto& [path, m] : m_) {
    c.tensors[prefix + "m." + path] =
        num::Container::Item{num::TensorD({static_cast<std::size_t>(m.size())}, m), false};
    c.tensors[prefix + "v." + path] = num::Container::Item{
        num::TensorD({static_cast<std::size_t>(v_.at(path).size())}, v_.at(path)), false};
  }
}

void Adam::load_state(const num::Container& c, const std::string& prefix) {
  if (c.meta.contains("adam_steps")) steps_ = c.meta["adam_steps"].get<std::uint64_t>();
  for (auto& [path, m] : m_) {
    auto it = c.tensors.find(prefix + "m." + path);
    if (it == c.tensors.end()) continue;  // fresh optimizer for new params
    m = it->second.tensor.data();
    v_.at(path) = c.tensors.at(prefix + "v." + path).tensor.data();
  }
}

}  // namespace artic::train
