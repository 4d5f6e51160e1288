#include "artic/num/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "artic/common.hpp"

namespace artic::num {

namespace {

constexpr char kMagic[8] = {'A', 'R', 'T', 'I', 'C', 'C', 'T', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(os, bits);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  std::uint64_t bits = get_u64(is);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_container(const std::string& path, const Container& c) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open for writing: " + path);
  os.write(kMagic, 8);
  put_u32(os, kContainerVersion);
  const std::string meta = c.meta.dump();
  put_u64(os, meta.size());
  os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  put_u64(os, c.tensors.size());
  for (const auto& [name, item] : c.tensors) {
    put_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    os.put(item.trainable ? 1 : 0);
    os.put(0);  // dtype 0 = float64
    put_u32(os, static_cast<std::uint32_t>(item.tensor.rank()));
    for (std::size_t d : item.tensor.shape()) put_u64(os, d);
    const auto& data = item.tensor.data();
    for (Eigen::Index i = 0; i < data.size(); ++i) put_f64(os, data(i));
  }
  if (!os) throw DataError("write failed: " + path);
}

Container load_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw DataError("not a container file (bad magic): " + path);
  const std::uint32_t version = get_u32(is);
  if (version != kContainerVersion)
    throw DataError("unsupported container version " + std::to_string(version) + ": " + path);
  Container c;
  const std::uint64_t meta_len = get_u64(is);
  std::string meta(meta_len, '\0');
  is.read(meta.data(), static_cast<std::streamsize>(meta_len));
  try {
    c.meta = meta.empty() ? nlohmann::json::object() : nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt container metadata in " + path + ": " + e.what());
  }
  const std::uint64_t count = get_u64(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = get_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    Container::Item item;
    item.trainable = is.get() != 0;
    const int dtype = is.get();
    if (dtype != 0) throw DataError("unsupported dtype in " + path);
    const std::uint32_t rank = get_u32(is);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(get_u64(is));
    item.tensor = TensorD(shape);
    for (Eigen::Index k = 0; k < item.tensor.data().size(); ++k)
      item.tensor.data()(k) = get_f64(is);
    if (!is) throw DataError("truncated container file: " + path);
    c.tensors.emplace(std::move(name), std::move(item));
  }
  return c;
}

void store_to_container(const ParameterStoreD& store, Container& c) {
  for (const auto& [path, entry] : store)
    c.tensors[path] = Container::Item{entry.value, entry.trainable};
}

void container_to_store(const Container& c, ParameterStoreD& store) {
  for (auto& [path, entry] : store) {
    auto it = c.tensors.find(path);
    if (it == c.tensors.end()) throw DataError("checkpoint is missing parameter " + path);
    if (it->second.tensor.shape() != entry.value.shape())
      throw DimensionError("checkpoint shape mismatch for " + path);
    entry.value = it->second.tensor;
  }
}

ParameterStoreD container_as_store(const Container& c) {
  ParameterStoreD store;
  for (const auto& [path, item] : c.tensors) {
    store.create(path, item.tensor.shape(), item.trainable);
    store.value(path) = item.tensor;
  }
  return store;
}

}  // namespace artic::num
