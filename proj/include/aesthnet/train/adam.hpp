#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "aesthnet/core/tensor.hpp"
#include "aesthnet/nn/network.hpp"

namespace aesthnet {

/// Adam with bias correction: m̂ = m/(1-β₁ᵗ), v̂ = v/(1-β₂ᵗ),
/// w -= lr · m̂ / (sqrt(v̂) + ε). Moment buffers key off parameter names and
/// materialize on first touch, so frozen parameters never acquire state.
template <typename S>
class AdamOptimizer {
public:
  AdamOptimizer(double beta1, double beta2, double epsilon)
      : beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

  std::uint64_t step_count() const { return t_; }

  /// One update over the trainable subset of `params`. Gradients are read
  /// from each ParamRef's grad tensor; frozen entries are skipped entirely.
  void step(std::vector<ParamRef<S>>& params, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (auto& p : params) {
      if (!p.trainable) continue;
      Slot& slot = slots_[p.name];
      if (slot.m.size() != p.value->size()) {
        slot.m.assign(p.value->size(), 0.0);
        slot.v.assign(p.value->size(), 0.0);
      }
      S* w = p.value->data();
      const S* g = p.grad->data();
      for (std::size_t i = 0; i < p.value->size(); ++i) {
        const double gi = static_cast<double>(g[i]);
        slot.m[i] = beta1_ * slot.m[i] + (1.0 - beta1_) * gi;
        slot.v[i] = beta2_ * slot.v[i] + (1.0 - beta2_) * gi * gi;
        const double mhat = slot.m[i] / bc1;
        const double vhat = slot.v[i] / bc2;
        w[i] = static_cast<S>(static_cast<double>(w[i]) -
                              lr * mhat / (std::sqrt(vhat) + epsilon_));
      }
    }
  }

private:
  struct Slot {
    std::vector<double> m;
    std::vector<double> v;
  };

  double beta1_;
  double beta2_;
  double epsilon_;
  std::uint64_t t_ = 0;
  std::map<std::string, Slot> slots_;
};

}  // namespace aesthnet
