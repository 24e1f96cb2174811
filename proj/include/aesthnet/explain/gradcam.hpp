#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "aesthnet/core/error.hpp"
#include "aesthnet/core/tensor.hpp"
#include "aesthnet/data/image.hpp"
#include "aesthnet/nn/network.hpp"

namespace aesthnet {

struct ActivationMap {
  std::string layer;
  std::size_t output_index = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> map;        // row-major, values in [0,1]
  double normalization_max = 0.0; // max of the rectified raw map
  std::string image_path;         // source reference, for sidecars
};

/// Gradient-weighted activation map for one output unit. Gradients are taken
/// on the pre-sigmoid logit so saturated predictions do not flatten the map:
/// channel weights are spatial means of d(logit)/d(activation); the map is
/// the rectified weighted channel sum, scaled by its max when positive.
template <typename S>
ActivationMap grad_cam(MultiTaskNetwork<S>& net, const EncodedBatch<S>& image,
                       std::size_t output_index, const std::string& layer_name,
                       const std::string& image_path = "") {
  if (image.batch_size() != 1)
    throw ValidationError("grad_cam expects a single-image batch");
  if (output_index >= net.outputs())
    throw ValidationError("output index " + std::to_string(output_index) +
                          " out of range for " +
                          std::to_string(net.outputs()) + " outputs");
  const std::size_t target = vgg_layer_index(layer_name);

  typename VggBackbone<S>::Cache cache;
  Tensor<S> x = nhwc_to_nchw(image.images);
  Tensor<S> fmap = net.backbone().forward(x, &cache, target);
  Tensor<S> features = global_avg_pool(fmap);
  typename RegressionHead<S>::Cache head_cache;
  net.head().forward(features, /*train=*/false, 0, 0, &head_cache);

  Tensor<S> d_logits({1, net.outputs()}, S(0));
  d_logits[output_index] = S(1);
  Tensor<S> d_features = net.head().backward_from_logits(
      head_cache, d_logits, /*want_feature_grad=*/true,
      /*want_param_grad=*/false);
  Tensor<S> d_fmap = global_avg_pool_backward(d_features, fmap.shape());
  Tensor<S> d_act = net.backbone().backward_to_activation(cache, d_fmap, target);

  const Tensor<S>& act = cache.activation[target];
  const std::size_t c = act.dim(1), h = act.dim(2), w = act.dim(3);
  const std::size_t hw = h * w;

  std::vector<double> weights(c, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double acc = 0.0;
    const S* g = d_act.data() + ch * hw;
    for (std::size_t i = 0; i < hw; ++i) acc += static_cast<double>(g[i]);
    weights[ch] = acc / static_cast<double>(hw);
  }

  ActivationMap result;
  result.layer = layer_name;
  result.output_index = output_index;
  result.height = h;
  result.width = w;
  result.image_path = image_path;
  result.map.assign(hw, 0.0);
  for (std::size_t i = 0; i < hw; ++i) {
    double acc = 0.0;
    for (std::size_t ch = 0; ch < c; ++ch)
      acc += weights[ch] * static_cast<double>(act[ch * hw + i]);
    result.map[i] = std::max(0.0, acc);
  }
  result.normalization_max =
      *std::max_element(result.map.begin(), result.map.end());
  if (result.normalization_max > 0.0)
    for (double& v : result.map) v /= result.normalization_max;
  return result;
}

}  // namespace aesthnet
