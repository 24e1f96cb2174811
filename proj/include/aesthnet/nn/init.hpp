#pragma once

#include <cmath>
#include <cstdint>

#include "aesthnet/core/rng.hpp"
#include "aesthnet/core/tensor.hpp"

namespace aesthnet {

/// Glorot-uniform bound sqrt(6 / (fan_in + fan_out)).
inline double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

template <typename Scalar>
void glorot_uniform_fill(Tensor<Scalar>& t, std::size_t fan_in,
                         std::size_t fan_out, Rng& rng) {
  const double bound = glorot_bound(fan_in, fan_out);
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
}

}  // namespace aesthnet
