#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "artic/num/param_store.hpp"
#include "artic/num/tensor.hpp"

namespace artic::num {

// Self-describing container file: named tensors (shape + little-endian
// doubles) plus a JSON metadata blob. Used for model checkpoints and
// feature caches alike.
struct Container {
  struct Item {
    TensorD tensor;
    bool trainable = true;
  };

  nlohmann::json meta;
  std::map<std::string, Item> tensors;
};

inline constexpr std::uint32_t kContainerVersion = 1;

void save_container(const std::string& path, const Container& c);
Container load_container(const std::string& path);

// Copy every parameter (values only) into / out of a container.
void store_to_container(const ParameterStoreD& store, Container& c);
// Shapes must match entries already present in `store`.
void container_to_store(const Container& c, ParameterStoreD& store);
// Rebuild a store from scratch with the container's shapes.
ParameterStoreD container_as_store(const Container& c);

}  // namespace artic::num
