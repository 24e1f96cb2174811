#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "aesthnet/core/error.hpp"
#include "aesthnet/core/rng.hpp"
#include "aesthnet/core/tensor.hpp"
#include "aesthnet/nn/init.hpp"
#include "aesthnet/nn/layers.hpp"

namespace aesthnet {

inline constexpr std::size_t kVggConvCount = 13;
inline constexpr std::size_t kVggBlockCount = 5;
inline constexpr std::size_t kVggFeatureChannels = 512;

inline constexpr std::array<std::size_t, kVggConvCount> kVggBlockOfLayer = {
    0, 0, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4};
inline constexpr std::array<std::size_t, kVggBlockCount> kVggBlockFirstLayer = {
    0, 2, 4, 7, 10};
inline constexpr std::array<std::size_t, kVggBlockCount> kVggBlockLastLayer = {
    1, 3, 6, 9, 12};
inline constexpr std::array<std::size_t, kVggBlockCount> kVggBlockChannels = {
    64, 128, 256, 512, 512};

inline const std::array<std::string, kVggConvCount>& vgg_layer_names() {
  static const std::array<std::string, kVggConvCount> names = {
      "block1_conv1", "block1_conv2", "block2_conv1", "block2_conv2",
      "block3_conv1", "block3_conv2", "block3_conv3", "block4_conv1",
      "block4_conv2", "block4_conv3", "block5_conv1", "block5_conv2",
      "block5_conv3"};
  return names;
}

inline std::size_t vgg_layer_index(const std::string& name) {
  const auto& names = vgg_layer_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw ValidationError("unknown backbone layer: " + name);
}

/// Five-block 3x3 convolutional feature extractor. Channels grow
/// 64/128/256/512/512 with a 2x2 max-pool after each block; a 3-channel
/// HxW input yields 512 x H/32 x W/32 features.
template <typename S>
class VggBackbone {
public:
  /// Forward state needed for backpropagation. `floor` is the lowest conv
  /// index batching a gradient; activations below it are not retained.
  struct Cache {
    Tensor<S> input;
    std::array<Tensor<S>, kVggConvCount> activation;  // post-ReLU
    std::array<PoolResult<S>, kVggBlockCount> pool;
    std::size_t floor = 0;
  };

  VggBackbone() {
    std::size_t in_c = 3;
    for (std::size_t b = 0; b < kVggBlockCount; ++b) {
      for (std::size_t i = kVggBlockFirstLayer[b]; i <= kVggBlockLastLayer[b];
           ++i) {
        convs_[i] = Conv2d<S>(in_c, kVggBlockChannels[b], 3);
        in_c = kVggBlockChannels[b];
      }
    }
    trainable_.fill(false);
  }

  Conv2d<S>& layer(std::size_t i) { return convs_.at(i); }
  const Conv2d<S>& layer(std::size_t i) const { return convs_.at(i); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& c : convs_) n += c.parameter_count();
    return n;
  }

  void set_trainable(std::size_t i, bool value) { trainable_.at(i) = value; }
  void set_all_trainable(bool value) { trainable_.fill(value); }
  const std::array<bool, kVggConvCount>& trainable() const {
    return trainable_;
  }

  /// Lowest conv index whose parameters receive gradients; kVggConvCount if
  /// the whole stack is frozen.
  std::size_t lowest_trainable() const {
    for (std::size_t i = 0; i < kVggConvCount; ++i)
      if (trainable_[i]) return i;
    return kVggConvCount;
  }

  void init_parameters(Rng& rng) {
    for (auto& c : convs_) {
      glorot_uniform_fill(c.weight, c.in_c * c.k * c.k, c.out_c * c.k * c.k,
                          rng);
      c.bias.fill(S(0));
    }
  }

  void zero_grad() {
    for (auto& c : convs_) c.zero_grad();
  }

  /// x: [N, 3, H, W]. When `cache` is given, retains activations for layers
  /// >= floor-1 and the pool state above them, which is what a later
  /// backward down to conv `floor` requires.
  Tensor<S> forward(const Tensor<S>& x, Cache* cache = nullptr,
                    std::size_t floor = 0) const {
    if (x.rank() != 4 || x.dim(1) != 3)
      throw ValidationError("backbone expects [N,3,H,W], got " +
                            Tensor<S>::shape_string(x.shape()));
    if (cache) {
      cache->floor = floor;
      if (floor == 0) cache->input = x;
    }
    Tensor<S> cur = x;
    for (std::size_t b = 0; b < kVggBlockCount; ++b) {
      for (std::size_t i = kVggBlockFirstLayer[b]; i <= kVggBlockLastLayer[b];
           ++i) {
        cur = convs_[i].forward(cur);
        relu_inplace(cur);
        if (cache && i + 1 >= floor) cache->activation[i] = cur;
      }
      PoolResult<S> pr = max_pool2(cur);
      if (cache && kVggBlockLastLayer[b] + 1 >= floor) {
        cache->pool[b].out = pr.out;
        cache->pool[b].argmax = std::move(pr.argmax);
        cur = std::move(pr.out);
      } else {
        cur = std::move(pr.out);
      }
    }
    return cur;
  }

  /// Accumulates parameter gradients for trainable convs given the gradient
  /// w.r.t. the backbone output (the final pool).
  void backward(const Cache& cache, const Tensor<S>& d_out) {
    if (lowest_trainable() == kVggConvCount) return;
    Tensor<S> g = d_out;
    propagate(cache, std::move(g), -1, true);
  }

  /// Gradient w.r.t. the post-ReLU activation of conv `target`, without
  /// touching parameter gradients.
  Tensor<S> backward_to_activation(const Cache& cache, const Tensor<S>& d_out,
                                   std::size_t target) {
    if (target >= kVggConvCount)
      throw ValidationError("conv index out of range");
    if (cache.floor > target)
      throw ValidationError("forward cache does not reach conv " +
                            std::to_string(target));
    Tensor<S> g = d_out;
    return propagate(cache, std::move(g), static_cast<std::ptrdiff_t>(target),
                     false);
  }

private:
  const Tensor<S>& conv_input(const Cache& cache, std::size_t i) const {
    if (i == 0) return cache.input;
    const std::size_t b = kVggBlockOfLayer[i];
    if (i == kVggBlockFirstLayer[b]) return cache.pool[b - 1].out;
    return cache.activation[i - 1];
  }

  Tensor<S> propagate(const Cache& cache, Tensor<S> g,
                      std::ptrdiff_t stop_target, bool accumulate) {
    const std::size_t lowest = accumulate ? lowest_trainable()
                                          : static_cast<std::size_t>(stop_target);
    for (std::ptrdiff_t b = kVggBlockCount - 1; b >= 0; --b) {
      const std::size_t bu = static_cast<std::size_t>(b);
      const std::size_t top = kVggBlockLastLayer[bu];
      g = max_pool2_backward(g, cache.pool[bu].argmax,
                             cache.activation[top].shape());
      for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(top);
           i >= static_cast<std::ptrdiff_t>(kVggBlockFirstLayer[bu]); --i) {
        const std::size_t iu = static_cast<std::size_t>(i);
        if (i == stop_target) return g;
        relu_backward_inplace(g, cache.activation[iu]);
        const bool want_param = accumulate && trainable_[iu];
        const bool want_input = lowest < iu;
        if (!want_param && !want_input) return Tensor<S>();
        g = convs_[iu].backward(conv_input(cache, iu), g, want_input,
                                want_param);
        if (!want_input) return Tensor<S>();
      }
    }
    return g;
  }

  std::array<Conv2d<S>, kVggConvCount> convs_;
  std::array<bool, kVggConvCount> trainable_;
};

}  // namespace aesthnet
