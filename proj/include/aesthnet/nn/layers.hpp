#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include "aesthnet/core/error.hpp"
#include "aesthnet/core/rng.hpp"
#include "aesthnet/core/tensor.hpp"

namespace aesthnet {

template <typename S>
using MatrixRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MapRM = Eigen::Map<MatrixRM<S>>;
template <typename S>
using ConstMapRM = Eigen::Map<const MatrixRM<S>>;

// ---------------------------------------------------------------------------
// Elementwise activations
// ---------------------------------------------------------------------------

template <typename S>
void relu_inplace(Tensor<S>& x) {
  S* p = x.data();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (p[i] < S(0)) p[i] = S(0);
}

/// grad *= (activated > 0); `activated` is the post-ReLU value.
template <typename S>
void relu_backward_inplace(Tensor<S>& grad, const Tensor<S>& activated) {
  S* g = grad.data();
  const S* a = activated.data();
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (a[i] <= S(0)) g[i] = S(0);
}

template <typename S>
void sigmoid_inplace(Tensor<S>& x) {
  S* p = x.data();
  for (std::size_t i = 0; i < x.size(); ++i)
    p[i] = S(1) / (S(1) + std::exp(-p[i]));
}

/// grad *= y * (1 - y) where y is the sigmoid output.
template <typename S>
void sigmoid_backward_inplace(Tensor<S>& grad, const Tensor<S>& y) {
  S* g = grad.data();
  const S* p = y.data();
  for (std::size_t i = 0; i < grad.size(); ++i)
    g[i] *= p[i] * (S(1) - p[i]);
}

// ---------------------------------------------------------------------------
// Inverted dropout. The mask is a pure function of (seed, counter), so a
// training step replays identically regardless of worker layout.
// ---------------------------------------------------------------------------

template <typename S>
Tensor<S> dropout_mask(const std::vector<std::size_t>& shape, double rate,
                       std::uint64_t seed, std::uint64_t counter) {
  if (rate < 0.0 || rate >= 1.0)
    throw ValidationError("dropout rate must be in [0,1)");
  Tensor<S> mask(shape);
  const double keep = 1.0 - rate;
  const S scale = static_cast<S>(1.0 / keep);
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = CounterRng::uniform(seed, counter, i) < keep ? scale : S(0);
  return mask;
}

template <typename S>
void mul_inplace(Tensor<S>& x, const Tensor<S>& mask) {
  const S* m = mask.data();
  S* p = x.data();
  for (std::size_t i = 0; i < x.size(); ++i) p[i] *= m[i];
}

// ---------------------------------------------------------------------------
// Fully-connected layer
// ---------------------------------------------------------------------------

template <typename S>
struct Dense {
  std::size_t in = 0, out = 0;
  Tensor<S> weight;       // [out, in]
  Tensor<S> bias;         // [out]
  Tensor<S> grad_weight;  // [out, in]
  Tensor<S> grad_bias;    // [out]

  Dense() = default;
  Dense(std::size_t in_dim, std::size_t out_dim)
      : in(in_dim),
        out(out_dim),
        weight({out_dim, in_dim}),
        bias({out_dim}, S(0)),
        grad_weight({out_dim, in_dim}, S(0)),
        grad_bias({out_dim}, S(0)) {}

  std::size_t parameter_count() const { return out * in + out; }

  void zero_grad() {
    grad_weight.fill(S(0));
    grad_bias.fill(S(0));
  }

  /// y[N,out] = x[N,in] W^T + b
  Tensor<S> forward(const Tensor<S>& x) const {
    const std::size_t n = x.dim(0);
    Tensor<S> y({n, out});
    ConstMapRM<S> xm(x.data(), static_cast<Eigen::Index>(n),
                     static_cast<Eigen::Index>(in));
    ConstMapRM<S> wm(weight.data(), static_cast<Eigen::Index>(out),
                     static_cast<Eigen::Index>(in));
    MapRM<S> ym(y.data(), static_cast<Eigen::Index>(n),
                static_cast<Eigen::Index>(out));
    ym.noalias() = xm * wm.transpose();
    Eigen::Map<const Eigen::Matrix<S, 1, Eigen::Dynamic>> bm(
        bias.data(), static_cast<Eigen::Index>(out));
    ym.rowwise() += bm;
    return y;
  }

  /// Accumulates parameter gradients (when requested) and returns dL/dx
  /// (when requested; otherwise an empty tensor).
  Tensor<S> backward(const Tensor<S>& x, const Tensor<S>& dy,
                     bool want_input_grad, bool want_param_grad) {
    const std::size_t n = x.dim(0);
    ConstMapRM<S> xm(x.data(), static_cast<Eigen::Index>(n),
                     static_cast<Eigen::Index>(in));
    ConstMapRM<S> dym(dy.data(), static_cast<Eigen::Index>(n),
                      static_cast<Eigen::Index>(out));
    if (want_param_grad) {
      MapRM<S> gw(grad_weight.data(), static_cast<Eigen::Index>(out),
                  static_cast<Eigen::Index>(in));
      gw.noalias() += dym.transpose() * xm;
      Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>> gb(
          grad_bias.data(), static_cast<Eigen::Index>(out));
      gb.noalias() += dym.colwise().sum().transpose();
    }
    Tensor<S> dx;
    if (want_input_grad) {
      dx = Tensor<S>({n, in});
      ConstMapRM<S> wm(weight.data(), static_cast<Eigen::Index>(out),
                       static_cast<Eigen::Index>(in));
      MapRM<S> dxm(dx.data(), static_cast<Eigen::Index>(n),
                   static_cast<Eigen::Index>(in));
      dxm.noalias() = dym * wm;
    }
    return dx;
  }
};

// ---------------------------------------------------------------------------
// 3x3 same-padding convolution via im2col + GEMM, NCHW layout
// ---------------------------------------------------------------------------

namespace detail {

/// Fills `col` (rows = in_c*k*k, cols = h*w) from one sample plane block.
template <typename S>
void im2col(const S* x, std::size_t in_c, std::size_t h, std::size_t w,
            std::size_t k, S* col) {
  const std::size_t pad = k / 2;
  const std::size_t hw = h * w;
  for (std::size_t c = 0; c < in_c; ++c) {
    const S* plane = x + c * hw;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        S* row = col + ((c * k + ky) * k + kx) * hw;
        for (std::size_t oy = 0; oy < h; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy + ky) - static_cast<std::ptrdiff_t>(pad);
          S* dst = row + oy * w;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) {
            std::memset(dst, 0, w * sizeof(S));
            continue;
          }
          const S* src = plane + static_cast<std::size_t>(iy) * w;
          const std::ptrdiff_t shift =
              static_cast<std::ptrdiff_t>(kx) - static_cast<std::ptrdiff_t>(pad);
          // dst[ox] = src[ox + shift] where valid, else 0
          std::size_t begin = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
          std::size_t end =
              shift > 0 ? w - static_cast<std::size_t>(shift) : w;
          if (begin > 0) std::memset(dst, 0, begin * sizeof(S));
          if (end < begin) end = begin;
          std::memcpy(dst + begin, src + static_cast<std::ptrdiff_t>(begin) + shift,
                      (end - begin) * sizeof(S));
          if (end < w) std::memset(dst + end, 0, (w - end) * sizeof(S));
        }
      }
    }
  }
}

/// Scatter-add inverse of im2col.
template <typename S>
void col2im_add(const S* col, std::size_t in_c, std::size_t h, std::size_t w,
                std::size_t k, S* x) {
  const std::size_t pad = k / 2;
  const std::size_t hw = h * w;
  for (std::size_t c = 0; c < in_c; ++c) {
    S* plane = x + c * hw;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const S* row = col + ((c * k + ky) * k + kx) * hw;
        const std::ptrdiff_t shift =
            static_cast<std::ptrdiff_t>(kx) - static_cast<std::ptrdiff_t>(pad);
        for (std::size_t oy = 0; oy < h; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy + ky) - static_cast<std::ptrdiff_t>(pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          const S* src = row + oy * w;
          S* dst = plane + static_cast<std::size_t>(iy) * w;
          std::size_t begin = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
          std::size_t end = shift > 0 ? w - static_cast<std::size_t>(shift) : w;
          for (std::size_t ox = begin; ox < end; ++ox)
            dst[static_cast<std::ptrdiff_t>(ox) + shift] += src[ox];
        }
      }
    }
  }
}

}  // namespace detail

template <typename S>
struct Conv2d {
  std::size_t in_c = 0, out_c = 0, k = 3;
  Tensor<S> weight;       // [out_c, in_c, k, k]
  Tensor<S> bias;         // [out_c]
  Tensor<S> grad_weight;
  Tensor<S> grad_bias;

  Conv2d() = default;
  Conv2d(std::size_t in_channels, std::size_t out_channels,
         std::size_t kernel = 3)
      : in_c(in_channels),
        out_c(out_channels),
        k(kernel),
        weight({out_channels, in_channels, kernel, kernel}),
        bias({out_channels}, S(0)),
        grad_weight({out_channels, in_channels, kernel, kernel}, S(0)),
        grad_bias({out_channels}, S(0)) {}

  std::size_t parameter_count() const { return out_c * in_c * k * k + out_c; }

  void zero_grad() {
    grad_weight.fill(S(0));
    grad_bias.fill(S(0));
  }

  /// x: [N, in_c, H, W] -> y: [N, out_c, H, W]
  Tensor<S> forward(const Tensor<S>& x) const {
    const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3);
    if (x.dim(1) != in_c)
      throw ValidationError("conv input channels " + std::to_string(x.dim(1)) +
                            " != " + std::to_string(in_c));
    Tensor<S> y({n, out_c, h, w});
    const std::size_t hw = h * w;
    const std::size_t ckk = in_c * k * k;
    const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < nn; ++s) {
      std::vector<S> col(ckk * hw);
      detail::im2col(x.data() + static_cast<std::size_t>(s) * in_c * hw, in_c,
                     h, w, k, col.data());
      ConstMapRM<S> wm(weight.data(), static_cast<Eigen::Index>(out_c),
                       static_cast<Eigen::Index>(ckk));
      ConstMapRM<S> cm(col.data(), static_cast<Eigen::Index>(ckk),
                       static_cast<Eigen::Index>(hw));
      MapRM<S> ym(y.data() + static_cast<std::size_t>(s) * out_c * hw,
                  static_cast<Eigen::Index>(out_c),
                  static_cast<Eigen::Index>(hw));
      ym.noalias() = wm * cm;
      for (std::size_t oc = 0; oc < out_c; ++oc)
        ym.row(static_cast<Eigen::Index>(oc)).array() += bias[oc];
    }
    return y;
  }

  /// x is the cached layer input. Parameter gradients accumulate one sample
  /// at a time in index order, so results do not depend on thread count.
  Tensor<S> backward(const Tensor<S>& x, const Tensor<S>& dy,
                     bool want_input_grad, bool want_param_grad) {
    const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::size_t hw = h * w;
    const std::size_t ckk = in_c * k * k;
    Tensor<S> dx;
    if (want_input_grad) dx = Tensor<S>({n, in_c, h, w}, S(0));

    std::vector<S> col(ckk * hw);
    std::vector<S> dcol(want_input_grad ? ckk * hw : 0);
    ConstMapRM<S> wm(weight.data(), static_cast<Eigen::Index>(out_c),
                     static_cast<Eigen::Index>(ckk));
    for (std::size_t s = 0; s < n; ++s) {
      ConstMapRM<S> dym(dy.data() + s * out_c * hw,
                        static_cast<Eigen::Index>(out_c),
                        static_cast<Eigen::Index>(hw));
      if (want_param_grad) {
        detail::im2col(x.data() + s * in_c * hw, in_c, h, w, k, col.data());
        ConstMapRM<S> cm(col.data(), static_cast<Eigen::Index>(ckk),
                         static_cast<Eigen::Index>(hw));
        MapRM<S> gw(grad_weight.data(), static_cast<Eigen::Index>(out_c),
                    static_cast<Eigen::Index>(ckk));
        gw.noalias() += dym * cm.transpose();
        for (std::size_t oc = 0; oc < out_c; ++oc)
          grad_bias[oc] += dym.row(static_cast<Eigen::Index>(oc)).sum();
      }
      if (want_input_grad) {
        MapRM<S> dcm(dcol.data(), static_cast<Eigen::Index>(ckk),
                     static_cast<Eigen::Index>(hw));
        dcm.noalias() = wm.transpose() * dym;
        detail::col2im_add(dcol.data(), in_c, h, w, k,
                           dx.data() + s * in_c * hw);
      }
    }
    return dx;
  }
};

// ---------------------------------------------------------------------------
// 2x2 stride-2 max pooling (floor semantics on odd extents)
// ---------------------------------------------------------------------------

template <typename S>
struct PoolResult {
  Tensor<S> out;                     // [N, C, H/2, W/2]
  std::vector<std::uint32_t> argmax; // flat per-sample input index per output
};

template <typename S>
PoolResult<S> max_pool2(const Tensor<S>& x) {
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = h / 2, ow = w / 2;
  if (oh == 0 || ow == 0)
    throw ValidationError("max_pool2 input too small: " +
                          Tensor<S>::shape_string(x.shape()));
  PoolResult<S> result;
  result.out = Tensor<S>({n, c, oh, ow});
  result.argmax.resize(n * c * oh * ow);
  const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < nn; ++s) {
    const S* xin = x.data() + static_cast<std::size_t>(s) * c * h * w;
    S* yout = result.out.data() + static_cast<std::size_t>(s) * c * oh * ow;
    std::uint32_t* am = result.argmax.data() + static_cast<std::size_t>(s) * c * oh * ow;
    for (std::size_t ch = 0; ch < c; ++ch) {
      const S* plane = xin + ch * h * w;
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const std::size_t iy = oy * 2, ix = ox * 2;
          std::size_t best = iy * w + ix;
          S bv = plane[best];
          const std::size_t candidates[3] = {iy * w + ix + 1, (iy + 1) * w + ix,
                                             (iy + 1) * w + ix + 1};
          for (std::size_t cand : candidates) {
            if (plane[cand] > bv) {
              bv = plane[cand];
              best = cand;
            }
          }
          yout[ch * oh * ow + oy * ow + ox] = bv;
          am[ch * oh * ow + oy * ow + ox] =
              static_cast<std::uint32_t>(ch * h * w + best);
        }
      }
    }
  }
  return result;
}

template <typename S>
Tensor<S> max_pool2_backward(const Tensor<S>& dy,
                             const std::vector<std::uint32_t>& argmax,
                             const std::vector<std::size_t>& input_shape) {
  Tensor<S> dx(input_shape, S(0));
  const std::size_t n = dy.dim(0);
  const std::size_t per_out = dy.size() / n;
  const std::size_t per_in = dx.size() / n;
  const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < nn; ++s) {
    const S* g = dy.data() + static_cast<std::size_t>(s) * per_out;
    const std::uint32_t* am = argmax.data() + static_cast<std::size_t>(s) * per_out;
    S* out = dx.data() + static_cast<std::size_t>(s) * per_in;
    for (std::size_t i = 0; i < per_out; ++i) out[am[i]] += g[i];
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Global average pooling: [N, C, H, W] -> [N, C]
// ---------------------------------------------------------------------------

template <typename S>
Tensor<S> global_avg_pool(const Tensor<S>& x) {
  const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
  Tensor<S> y({n, c});
  const S inv = static_cast<S>(1.0 / static_cast<double>(hw));
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const S* plane = x.data() + (s * c + ch) * hw;
      S acc = S(0);
      for (std::size_t i = 0; i < hw; ++i) acc += plane[i];
      y[s * c + ch] = acc * inv;
    }
  return y;
}

template <typename S>
Tensor<S> global_avg_pool_backward(const Tensor<S>& dy,
                                   const std::vector<std::size_t>& input_shape) {
  Tensor<S> dx(input_shape);
  const std::size_t n = input_shape[0], c = input_shape[1],
                    hw = input_shape[2] * input_shape[3];
  const S inv = static_cast<S>(1.0 / static_cast<double>(hw));
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const S g = dy[s * c + ch] * inv;
      S* plane = dx.data() + (s * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) plane[i] = g;
    }
  return dx;
}

}  // namespace aesthnet
