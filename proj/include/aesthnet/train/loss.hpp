#pragma once

#include <cmath>
#include <vector>

#include "aesthnet/core/error.hpp"
#include "aesthnet/core/tensor.hpp"

namespace aesthnet {

/// Mean squared error over all B x M entries jointly. Optional per-target
/// weights are accepted (all-ones by default); the weighted form exists for
/// experimentation only and is off everywhere in the shipped pipelines.
template <typename S>
double mse_loss(const Tensor<S>& predictions, const Tensor<S>& targets,
                const std::vector<double>& target_weights = {}) {
  if (!predictions.same_shape(targets))
    throw ValidationError("mse_loss shape mismatch: " +
                          Tensor<S>::shape_string(predictions.shape()) +
                          " vs " + Tensor<S>::shape_string(targets.shape()));
  if (predictions.size() == 0) throw ValidationError("mse_loss on empty input");
  const std::size_t m =
      predictions.rank() == 2 ? predictions.dim(1) : predictions.size();
  if (!target_weights.empty() && target_weights.size() != m)
    throw ValidationError("target weight count != target count");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = static_cast<double>(predictions[i]) -
                     static_cast<double>(targets[i]);
    if (!std::isfinite(d)) throw NumericError("non-finite value in mse_loss");
    const double w =
        target_weights.empty() ? 1.0 : target_weights[i % m];
    acc += w * d * d;
  }
  return acc / static_cast<double>(predictions.size());
}

/// dL/d(predictions) for the joint-mean reduction: 2 w (p - t) / (B * M).
template <typename S>
Tensor<S> mse_loss_grad(const Tensor<S>& predictions, const Tensor<S>& targets,
                        const std::vector<double>& target_weights = {}) {
  if (!predictions.same_shape(targets))
    throw ValidationError("mse_loss_grad shape mismatch");
  const std::size_t m =
      predictions.rank() == 2 ? predictions.dim(1) : predictions.size();
  Tensor<S> grad(predictions.shape());
  const double scale = 2.0 / static_cast<double>(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double w = target_weights.empty() ? 1.0 : target_weights[i % m];
    grad[i] = static_cast<S>(scale * w *
                             (static_cast<double>(predictions[i]) -
                              static_cast<double>(targets[i])));
  }
  return grad;
}

}  // namespace aesthnet
