#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "aesthnet/core/error.hpp"
#include "aesthnet/core/tensor.hpp"
#include "aesthnet/nn/network.hpp"

namespace aesthnet {

static_assert(std::endian::native == std::endian::little,
              "weight container I/O assumes a little-endian host");

namespace container {

inline constexpr char kMagic[8] = {'A', 'E', 'S', 'N', 'T', 'N', 'S', '1'};

enum class Dtype : std::uint8_t { kF32 = 0, kF64 = 1 };

template <typename S>
constexpr Dtype dtype_of();
template <>
constexpr Dtype dtype_of<float>() { return Dtype::kF32; }
template <>
constexpr Dtype dtype_of<double>() { return Dtype::kF64; }

inline std::size_t dtype_size(Dtype d) {
  return d == Dtype::kF32 ? 4 : 8;
}

struct Entry {
  Dtype dtype = Dtype::kF32;
  std::vector<std::size_t> dims;
  std::vector<unsigned char> raw;

  std::size_t element_count() const {
    std::size_t n = dims.empty() ? 0 : 1;
    for (std::size_t d : dims) n *= d;
    return n;
  }

  template <typename S>
  Tensor<S> as() const {
    Tensor<S> t(dims);
    const std::size_t n = element_count();
    if (dtype == dtype_of<S>()) {
      std::memcpy(t.data(), raw.data(), raw.size());
    } else if (dtype == Dtype::kF32) {
      const float* src = reinterpret_cast<const float*>(raw.data());
      for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<S>(src[i]);
    } else {
      const double* src = reinterpret_cast<const double*>(raw.data());
      for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<S>(src[i]);
    }
    return t;
  }

  template <typename S>
  static Entry from(const Tensor<S>& t) {
    Entry e;
    e.dtype = dtype_of<S>();
    e.dims = t.shape();
    e.raw.resize(t.size() * sizeof(S));
    std::memcpy(e.raw.data(), t.data(), e.raw.size());
    return e;
  }
};

struct File {
  nlohmann::ordered_json metadata;
  std::vector<std::pair<std::string, Entry>> tensors;  // insertion order

  const Entry* find(const std::string& name) const {
    for (const auto& [n, e] : tensors)
      if (n == name) return &e;
    return nullptr;
  }
};

namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
inline std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace detail

inline void write_file(const std::string& path, const File& file) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  const std::string meta = file.metadata.dump();
  detail::write_u64(os, meta.size());
  os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  detail::write_u64(os, file.tensors.size());
  for (const auto& [name, e] : file.tensors) {
    detail::write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    os.put(static_cast<char>(e.dtype));
    detail::write_u32(os, static_cast<std::uint32_t>(e.dims.size()));
    for (std::size_t d : e.dims) detail::write_u64(os, d);
    os.write(reinterpret_cast<const char*>(e.raw.data()),
             static_cast<std::streamsize>(e.raw.size()));
  }
  if (!os) throw IoError("short write: " + path);
}

inline File read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a weight container: " + path);
  File file;
  const std::uint64_t meta_len = detail::read_u64(is);
  std::string meta(meta_len, '\0');
  is.read(meta.data(), static_cast<std::streamsize>(meta_len));
  try {
    file.metadata = nlohmann::ordered_json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("corrupt container metadata in " + path + ": " + e.what());
  }
  const std::uint64_t count = detail::read_u64(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = detail::read_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    Entry e;
    int dtype_byte = is.get();
    if (dtype_byte != 0 && dtype_byte != 1)
      throw IoError("unknown dtype in " + path);
    e.dtype = static_cast<Dtype>(dtype_byte);
    const std::uint32_t rank = detail::read_u32(is);
    e.dims.resize(rank);
    for (std::uint32_t r = 0; r < rank; ++r) e.dims[r] = detail::read_u64(is);
    e.raw.resize(e.element_count() * dtype_size(e.dtype));
    is.read(reinterpret_cast<char*>(e.raw.data()),
            static_cast<std::streamsize>(e.raw.size()));
    if (!is) throw IoError("truncated container: " + path);
    file.tensors.emplace_back(std::move(name), std::move(e));
  }
  return file;
}

}  // namespace container

inline const char* kCheckpointFormat = "aesthnet-checkpoint";

template <typename S>
void save_checkpoint(const MultiTaskNetwork<S>& net, const std::string& path) {
  container::File file;
  nlohmann::ordered_json meta;
  meta["format"] = kCheckpointFormat;
  meta["version"] = 1;
  meta["schema"] = net.schema_name();
  meta["outputs"] = net.outputs();
  meta["hidden1"] = net.head().fc1().out;
  meta["hidden2"] = net.head().fc2().out;
  meta["resolution"] = net.input_resolution();
  meta["preprocess"] = to_string(net.preprocess());
  meta["dropout"] = net.head().dropout_rate();
  nlohmann::ordered_json mask;
  for (const auto& [name, flag] : net.trainable_mask()) mask[name] = flag;
  meta["trainable"] = mask;
  meta["scalar"] = container::dtype_of<S>() == container::Dtype::kF32 ? "f32"
                                                                      : "f64";
  file.metadata = std::move(meta);
  auto& mutable_net = const_cast<MultiTaskNetwork<S>&>(net);
  for (const auto& ref : mutable_net.parameters())
    file.tensors.emplace_back(ref.name, container::Entry::from(*ref.value));
  container::write_file(path, file);
}

template <typename S>
MultiTaskNetwork<S> load_checkpoint(const std::string& path) {
  container::File file = container::read_file(path);
  const auto& meta = file.metadata;
  if (!meta.contains("format") || meta["format"] != kCheckpointFormat)
    throw IoError("not a checkpoint file: " + path);
  HeadSpec spec;
  spec.outputs = meta.at("outputs").get<std::size_t>();
  spec.hidden1 = meta.value("hidden1", std::size_t{128});
  spec.hidden2 = meta.value("hidden2", std::size_t{64});
  spec.dropout = meta.at("dropout").get<double>();
  MultiTaskNetwork<S> net(spec);
  net.set_schema_name(meta.at("schema").get<std::string>());
  net.set_input_resolution(meta.at("resolution").get<std::size_t>());
  net.set_preprocess(parse_preprocess(meta.at("preprocess").get<std::string>()));
  for (auto& ref : net.parameters()) {
    const container::Entry* e = file.find(ref.name);
    if (!e) throw IoError("checkpoint missing tensor " + ref.name);
    if (e->dims != ref.value->shape())
      throw IoError("checkpoint tensor " + ref.name + " has shape " +
                    Tensor<S>::shape_string(e->dims) + ", expected " +
                    Tensor<S>::shape_string(ref.value->shape()));
    *ref.value = e->template as<S>();
  }
  std::map<std::string, bool> mask;
  for (const auto& [name, flag] : meta.at("trainable").items())
    mask[name] = flag.template get<bool>();
  net.freeze_backbone();
  net.apply_trainable_mask(mask);
  return net;
}

/// Copies the 13 conv weight/bias pairs from a container into the backbone.
/// Conv weights are stored [out_c, in_c, k, k].
template <typename S>
void load_backbone_weights(MultiTaskNetwork<S>& net, const std::string& path) {
  container::File file = container::read_file(path);
  for (std::size_t i = 0; i < kVggConvCount; ++i) {
    auto& conv = net.backbone().layer(i);
    const std::string& base = vgg_layer_names()[i];
    const container::Entry* w = file.find(base + "/weight");
    const container::Entry* b = file.find(base + "/bias");
    if (!w || !b)
      throw IoError("backbone weights missing layer " + base + " in " + path);
    if (w->dims != conv.weight.shape())
      throw IoError("backbone tensor " + base + "/weight has shape " +
                    Tensor<S>::shape_string(w->dims) + ", expected " +
                    Tensor<S>::shape_string(conv.weight.shape()));
    if (b->dims != conv.bias.shape())
      throw IoError("backbone tensor " + base + "/bias has shape " +
                    Tensor<S>::shape_string(b->dims) + ", expected " +
                    Tensor<S>::shape_string(conv.bias.shape()));
    conv.weight = w->template as<S>();
    conv.bias = b->template as<S>();
  }
}

/// Assembles a network: head drawn Glorot-uniform under `seed` (biases
/// zero), backbone loaded verbatim from `backbone.weights_path`, or seeded
/// random when the path is empty.
template <typename S = float>
MultiTaskNetwork<S> build_network(const BackboneSpec& backbone,
                                  const HeadSpec& head, std::uint64_t seed) {
  MultiTaskNetwork<S> net(head);
  net.init_parameters(seed);
  if (!backbone.weights_path.empty())
    load_backbone_weights(net, backbone.weights_path);
  return net;
}

}  // namespace aesthnet
