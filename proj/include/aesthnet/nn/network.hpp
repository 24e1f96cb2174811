#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aesthnet/core/error.hpp"
#include "aesthnet/core/rng.hpp"
#include "aesthnet/core/tensor.hpp"
#include "aesthnet/data/image.hpp"
#include "aesthnet/nn/backbone.hpp"
#include "aesthnet/nn/head.hpp"
#include "aesthnet/nn/layers.hpp"

namespace aesthnet {

struct HeadSpec {
  std::size_t outputs = 1;
  double dropout = 0.0;
  std::size_t hidden1 = 128;
  std::size_t hidden2 = 64;
};

struct BackboneSpec {
  std::string weights_path;  // empty = random (Glorot) initialization
};

enum class Part { kBackbone, kHiddenLayers, kOutputLayer, kTotal };

inline const std::vector<std::string>& head_layer_names() {
  static const std::vector<std::string> names = {"fc1", "fc2", "output"};
  return names;
}

/// Named view over one parameter tensor and its gradient slot.
template <typename S>
struct ParamRef {
  std::string name;  // "<layer>/weight" or "<layer>/bias"
  Tensor<S>* value = nullptr;
  Tensor<S>* grad = nullptr;
  bool trainable = false;
};

/// Backbone -> global average pooling -> regression head. Output index 0 is
/// the overall score; 1..K follow the attribute schema order.
template <typename S = float>
class MultiTaskNetwork {
public:
  struct ForwardCache {
    typename VggBackbone<S>::Cache backbone;
    std::vector<std::size_t> feature_shape;  // [N, C, h, w] before pooling
    typename RegressionHead<S>::Cache head;
  };

  MultiTaskNetwork() = default;
  explicit MultiTaskNetwork(const HeadSpec& head)
      : head_(kVggFeatureChannels, head.outputs, head.dropout, head.hidden1,
              head.hidden2) {
    head_trainable_ = {true, true, true};
  }

  VggBackbone<S>& backbone() { return backbone_; }
  const VggBackbone<S>& backbone() const { return backbone_; }
  RegressionHead<S>& head() { return head_; }
  const RegressionHead<S>& head() const { return head_; }

  std::size_t outputs() const { return head_.outputs(); }

  std::size_t input_resolution() const { return resolution_; }
  void set_input_resolution(std::size_t r) { resolution_ = r; }
  Preprocess preprocess() const { return preprocess_; }
  void set_preprocess(Preprocess p) { preprocess_ = p; }
  const std::string& schema_name() const { return schema_name_; }
  void set_schema_name(std::string name) { schema_name_ = std::move(name); }

  std::size_t count_parameters(Part part) const {
    switch (part) {
      case Part::kBackbone:
        return backbone_.parameter_count();
      case Part::kHiddenLayers:
        return head_.hidden_parameter_count();
      case Part::kOutputLayer:
        return head_.output_parameter_count();
      case Part::kTotal:
        return backbone_.parameter_count() + head_.parameter_count();
    }
    throw ValidationError("unknown parameter part");
  }

  /// Updates the trainability mask for exactly the named layers. Valid names
  /// are the backbone conv names plus fc1/fc2/output.
  void set_trainable(const std::vector<std::string>& names, bool flag) {
    for (const std::string& name : names) {
      bool found = false;
      const auto& conv_names = vgg_layer_names();
      for (std::size_t i = 0; i < conv_names.size(); ++i) {
        if (conv_names[i] == name) {
          backbone_.set_trainable(i, flag);
          found = true;
          break;
        }
      }
      if (found) continue;
      const auto& head_names = head_layer_names();
      for (std::size_t i = 0; i < head_names.size(); ++i) {
        if (head_names[i] == name) {
          head_trainable_[i] = flag;
          found = true;
          break;
        }
      }
      if (!found) {
        std::string valid;
        for (const auto& n : conv_names) valid += n + " ";
        for (const auto& n : head_names) valid += n + " ";
        throw ValidationError("unknown layer '" + name +
                              "'; valid layers: " + valid);
      }
    }
  }

  void freeze_backbone() { backbone_.set_all_trainable(false); }

  std::map<std::string, bool> trainable_mask() const {
    std::map<std::string, bool> mask;
    const auto& conv_names = vgg_layer_names();
    for (std::size_t i = 0; i < conv_names.size(); ++i)
      mask[conv_names[i]] = backbone_.trainable()[i];
    const auto& head_names = head_layer_names();
    for (std::size_t i = 0; i < head_names.size(); ++i)
      mask[head_names[i]] = head_trainable_[i];
    return mask;
  }

  void apply_trainable_mask(const std::map<std::string, bool>& mask) {
    for (const auto& [name, flag] : mask) set_trainable({name}, flag);
  }

  /// Deterministic parameter walk: backbone convs in forward order, then
  /// fc1, fc2, output; weight before bias.
  std::vector<ParamRef<S>> parameters() {
    std::vector<ParamRef<S>> refs;
    const auto& conv_names = vgg_layer_names();
    for (std::size_t i = 0; i < kVggConvCount; ++i) {
      auto& c = backbone_.layer(i);
      const bool t = backbone_.trainable()[i];
      refs.push_back({conv_names[i] + "/weight", &c.weight, &c.grad_weight, t});
      refs.push_back({conv_names[i] + "/bias", &c.bias, &c.grad_bias, t});
    }
    Dense<S>* dense[3] = {&head_.fc1(), &head_.fc2(), &head_.output_layer()};
    const auto& head_names = head_layer_names();
    for (std::size_t i = 0; i < 3; ++i) {
      refs.push_back({head_names[i] + "/weight", &dense[i]->weight,
                      &dense[i]->grad_weight, head_trainable_[i]});
      refs.push_back({head_names[i] + "/bias", &dense[i]->bias,
                      &dense[i]->grad_bias, head_trainable_[i]});
    }
    return refs;
  }

  void zero_grad() {
    backbone_.zero_grad();
    head_.zero_grad();
  }

  /// Head weights are seeded Glorot draws; backbone too when no pretrained
  /// file is in play (callers overwrite it from the weight file otherwise).
  void init_parameters(std::uint64_t seed) {
    Rng rng(seed);
    backbone_.init_parameters(rng);
    head_.init_parameters(rng);
  }

  /// x: [N, 3, H, W]. In train mode `step` keys the dropout mask and the
  /// cache retains what backward needs given the current trainable set.
  Tensor<S> forward(const Tensor<S>& x, bool train, std::uint64_t seed = 0,
                    std::uint64_t step = 0, ForwardCache* cache = nullptr) const {
    typename VggBackbone<S>::Cache* bc = cache ? &cache->backbone : nullptr;
    const std::size_t floor = cache ? backbone_.lowest_trainable() : 0;
    Tensor<S> fmap = backbone_.forward(x, bc, bc ? floor : 0);
    if (cache) cache->feature_shape = fmap.shape();
    Tensor<S> features = global_avg_pool(fmap);
    return head_.forward(features, train, seed, step,
                         cache ? &cache->head : nullptr);
  }

  /// Convenience for pre-pooled features (the frozen-backbone fast path).
  Tensor<S> forward_features(const Tensor<S>& features, bool train,
                             std::uint64_t seed = 0, std::uint64_t step = 0,
                             typename RegressionHead<S>::Cache* cache =
                                 nullptr) const {
    return head_.forward(features, train, seed, step, cache);
  }

  /// Accumulates gradients for all trainable layers from dL/d(output).
  void backward(const ForwardCache& cache, const Tensor<S>& d_output) {
    const bool into_backbone =
        backbone_.lowest_trainable() < kVggConvCount;
    Tensor<S> d_features = head_.backward(cache.head, d_output, into_backbone);
    if (!into_backbone) return;
    Tensor<S> d_fmap =
        global_avg_pool_backward(d_features, cache.feature_shape);
    backbone_.backward(cache.backbone, d_fmap);
  }

  /// Eval-mode predictions for an encoded batch.
  Tensor<S> predict(const EncodedBatch<S>& batch) const {
    Tensor<S> x = nhwc_to_nchw(batch.images);
    return forward(x, false);
  }

private:
  VggBackbone<S> backbone_;
  RegressionHead<S> head_;
  std::array<bool, 3> head_trainable_ = {true, true, true};
  std::size_t resolution_ = 224;
  Preprocess preprocess_ = Preprocess::kVggCaffe;
  std::string schema_name_;
};

}  // namespace aesthnet
