#pragma once

#include <cstdint>

#include "aesthnet/core/error.hpp"
#include "aesthnet/core/rng.hpp"
#include "aesthnet/core/tensor.hpp"
#include "aesthnet/nn/init.hpp"
#include "aesthnet/nn/layers.hpp"

namespace aesthnet {

namespace detail {
inline constexpr std::uint64_t kDropoutStream = 0x64726f70ULL;  // "drop"
}

/// Two hidden rectified layers (128 then 64 units), inverted dropout on the
/// second one, and a sigmoid output row per target. All output units read the
/// same 64-unit representation.
template <typename S>
class RegressionHead {
public:
  struct Cache {
    Tensor<S> input;    // features [N, in]
    Tensor<S> h1;       // post-ReLU [N, hidden1]
    Tensor<S> h2;       // post-ReLU [N, hidden2]
    Tensor<S> mask;     // dropout mask, empty in eval mode
    Tensor<S> h2d;      // h2 after dropout (== h2 in eval mode)
    Tensor<S> output;   // sigmoid predictions [N, outputs]
  };

  RegressionHead() = default;
  RegressionHead(std::size_t in_features, std::size_t outputs,
                 double dropout_rate, std::size_t hidden1 = 128,
                 std::size_t hidden2 = 64)
      : fc1_(in_features, hidden1),
        fc2_(hidden1, hidden2),
        out_(hidden2, outputs),
        dropout_rate_(dropout_rate) {
    if (outputs == 0) throw ValidationError("head needs at least one output");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
      throw ValidationError("dropout rate must be in [0,1)");
  }

  Dense<S>& fc1() { return fc1_; }
  Dense<S>& fc2() { return fc2_; }
  Dense<S>& output_layer() { return out_; }
  const Dense<S>& fc1() const { return fc1_; }
  const Dense<S>& fc2() const { return fc2_; }
  const Dense<S>& output_layer() const { return out_; }

  std::size_t in_features() const { return fc1_.in; }
  std::size_t outputs() const { return out_.out; }
  double dropout_rate() const { return dropout_rate_; }
  void set_dropout_rate(double r) {
    if (r < 0.0 || r >= 1.0)
      throw ValidationError("dropout rate must be in [0,1)");
    dropout_rate_ = r;
  }

  std::size_t hidden_parameter_count() const {
    return fc1_.parameter_count() + fc2_.parameter_count();
  }
  std::size_t output_parameter_count() const { return out_.parameter_count(); }
  std::size_t parameter_count() const {
    return hidden_parameter_count() + output_parameter_count();
  }

  /// Weight draws happen in layer order (fc1, fc2, output) so a fixed seed
  /// reproduces the head bit for bit.
  void init_parameters(Rng& rng) {
    glorot_uniform_fill(fc1_.weight, fc1_.in, fc1_.out, rng);
    glorot_uniform_fill(fc2_.weight, fc2_.in, fc2_.out, rng);
    glorot_uniform_fill(out_.weight, out_.in, out_.out, rng);
    fc1_.bias.fill(S(0));
    fc2_.bias.fill(S(0));
    out_.bias.fill(S(0));
  }

  void zero_grad() {
    fc1_.zero_grad();
    fc2_.zero_grad();
    out_.zero_grad();
  }

  /// `step` keys the dropout mask; eval mode (train=false) never drops.
  Tensor<S> forward(const Tensor<S>& features, bool train, std::uint64_t seed,
                    std::uint64_t step, Cache* cache = nullptr) const {
    if (features.rank() != 2 || features.dim(1) != fc1_.in)
      throw ValidationError("head expects [N," + std::to_string(fc1_.in) +
                            "] features, got " +
                            Tensor<S>::shape_string(features.shape()));
    Tensor<S> h1 = fc1_.forward(features);
    relu_inplace(h1);
    Tensor<S> h2 = fc2_.forward(h1);
    relu_inplace(h2);
    Tensor<S> mask;
    Tensor<S> h2d = h2;
    if (train && dropout_rate_ > 0.0) {
      mask = dropout_mask<S>(h2.shape(), dropout_rate_, seed,
                             detail::mix(detail::kDropoutStream, step));
      mul_inplace(h2d, mask);
    }
    Tensor<S> y = out_.forward(h2d);
    sigmoid_inplace(y);
    if (cache) {
      cache->input = features;
      cache->h1 = std::move(h1);
      cache->h2 = std::move(h2);
      cache->mask = std::move(mask);
      cache->h2d = std::move(h2d);
      cache->output = y;
    }
    return y;
  }

  /// Training backward: d_output is dL/d(sigmoid output). Parameter
  /// gradients accumulate; returns dL/d features when requested.
  Tensor<S> backward(const Cache& cache, const Tensor<S>& d_output,
                     bool want_feature_grad) {
    Tensor<S> g = d_output;
    sigmoid_backward_inplace(g, cache.output);
    return backward_from_logits(cache, g, want_feature_grad, true);
  }

  /// Backward from a gradient on the pre-sigmoid logits. With
  /// want_param_grad=false this is the pure path the explanation module uses.
  Tensor<S> backward_from_logits(const Cache& cache, const Tensor<S>& d_logits,
                                 bool want_feature_grad, bool want_param_grad) {
    Tensor<S> g = out_.backward(cache.h2d, d_logits, true, want_param_grad);
    if (!cache.mask.empty()) mul_inplace(g, cache.mask);
    relu_backward_inplace(g, cache.h2);
    g = fc2_.backward(cache.h1, g, true, want_param_grad);
    relu_backward_inplace(g, cache.h1);
    return fc1_.backward(cache.input, g, want_feature_grad, want_param_grad);
  }

private:
  Dense<S> fc1_;
  Dense<S> fc2_;
  Dense<S> out_;
  double dropout_rate_ = 0.0;
};

}  // namespace aesthnet
