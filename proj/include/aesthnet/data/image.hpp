#pragma once

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <array>
#include <string>
#include <vector>

#include "aesthnet/core/error.hpp"
#include "aesthnet/core/tensor.hpp"

namespace aesthnet {

/// Channel preprocessing applied after resizing to the backbone input size.
///  kVggCaffe: RGB -> BGR reorder and per-channel mean subtraction
///             (103.939, 116.779, 123.68), the recipe the reference VGG16
///             weights were trained with. No scaling.
///  kUnit:     RGB scaled to [0,1].
enum class Preprocess { kVggCaffe, kUnit };

inline std::string to_string(Preprocess p) {
  return p == Preprocess::kVggCaffe ? "vgg_caffe" : "unit";
}

inline Preprocess parse_preprocess(const std::string& s) {
  if (s == "vgg_caffe") return Preprocess::kVggCaffe;
  if (s == "unit") return Preprocess::kUnit;
  throw ConfigError("unknown preprocess mode '" + s + "'");
}

/// Inclusive bound on preprocessed pixel values.
inline std::pair<double, double> preprocess_range(Preprocess p) {
  if (p == Preprocess::kVggCaffe) return {-123.68, 255.0 - 103.939};
  return {0.0, 1.0};
}

constexpr std::array<double, 3> kVggBgrMeans = {103.939, 116.779, 123.68};

/// A batch ready for the network: images as a B x H x W x 3 tensor in the
/// preprocessed range, targets as a B x (K+1) matrix in [0,1].
template <typename Scalar>
struct EncodedBatch {
  Tensor<Scalar> images;
  Tensor<Scalar> targets;

  std::size_t batch_size() const {
    return images.rank() == 4 ? images.dim(0) : 0;
  }
};

/// Decodes, resizes, and preprocesses one image file into an H x W x 3
/// tensor. Deterministic: the same file yields bit-identical tensors.
template <typename Scalar>
Tensor<Scalar> encode_image(const std::string& path, std::size_t resolution,
                            Preprocess preprocess) {
  cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError("cannot decode image: " + path);
  cv::Mat resized;
  if (bgr.cols == static_cast<int>(resolution) &&
      bgr.rows == static_cast<int>(resolution)) {
    resized = bgr;
  } else {
    cv::resize(bgr, resized, cv::Size(static_cast<int>(resolution),
                                      static_cast<int>(resolution)),
               0, 0, cv::INTER_LINEAR);
  }

  Tensor<Scalar> out({resolution, resolution, 3});
  Scalar* dst = out.data();
  for (std::size_t y = 0; y < resolution; ++y) {
    const unsigned char* row = resized.ptr<unsigned char>(static_cast<int>(y));
    for (std::size_t x = 0; x < resolution; ++x) {
      const unsigned char b = row[3 * x + 0];
      const unsigned char g = row[3 * x + 1];
      const unsigned char r = row[3 * x + 2];
      Scalar* px = dst + (y * resolution + x) * 3;
      if (preprocess == Preprocess::kVggCaffe) {
        px[0] = static_cast<Scalar>(b - kVggBgrMeans[0]);
        px[1] = static_cast<Scalar>(g - kVggBgrMeans[1]);
        px[2] = static_cast<Scalar>(r - kVggBgrMeans[2]);
      } else {
        px[0] = static_cast<Scalar>(r / 255.0);
        px[1] = static_cast<Scalar>(g / 255.0);
        px[2] = static_cast<Scalar>(b / 255.0);
      }
    }
  }
  return out;
}

/// Horizontal flip of an H x W x C image tensor: columns reversed. Targets
/// are never touched by augmentation.
template <typename Scalar>
Tensor<Scalar> augment_flip(const Tensor<Scalar>& image, bool coin) {
  if (image.rank() != 3)
    throw ValidationError("augment_flip expects an H x W x C image");
  if (!coin) return image;
  const std::size_t h = image.dim(0), w = image.dim(1), c = image.dim(2);
  Tensor<Scalar> out({h, w, c});
  const Scalar* src = image.data();
  Scalar* dst = out.data();
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const Scalar* s = src + (y * w + (w - 1 - x)) * c;
      Scalar* d = dst + (y * w + x) * c;
      for (std::size_t ch = 0; ch < c; ++ch) d[ch] = s[ch];
    }
  return out;
}

/// Transposes a [N, H, W, C] batch into the [N, C, H, W] layout the network
/// consumes.
template <typename Scalar>
Tensor<Scalar> nhwc_to_nchw(const Tensor<Scalar>& batch) {
  if (batch.rank() != 4)
    throw ValidationError("nhwc_to_nchw expects a rank-4 batch");
  const std::size_t n = batch.dim(0), h = batch.dim(1), w = batch.dim(2),
                    c = batch.dim(3);
  Tensor<Scalar> out({n, c, h, w});
  for (std::size_t s = 0; s < n; ++s) {
    const Scalar* src = batch.data() + s * h * w * c;
    Scalar* dst = out.data() + s * c * h * w;
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        for (std::size_t ch = 0; ch < c; ++ch)
          dst[ch * h * w + y * w + x] = src[(y * w + x) * c + ch];
  }
  return out;
}

}  // namespace aesthnet
