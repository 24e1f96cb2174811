#pragma once

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <fstream>
#include <string>

#include "aesthnet/core/error.hpp"
#include "aesthnet/data/record.hpp"
#include "aesthnet/explain/gradcam.hpp"

namespace aesthnet {

/// Renders `map` over the original image: bilinear upsample to the image
/// size, JET colormap, alpha blend at `opacity`. Writes the PNG plus a
/// sidecar text file recording layer, output index, and normalization max.
inline void overlay(const ActivationMap& map, const std::string& image_path,
                    const std::string& output_path, double opacity) {
  if (!(opacity > 0.0 && opacity < 1.0))
    throw ValidationError("opacity must lie strictly inside (0,1)");
  cv::Mat original = cv::imread(image_path, cv::IMREAD_COLOR);
  if (original.empty()) throw IoError("cannot decode image: " + image_path);

  cv::Mat small(static_cast<int>(map.height), static_cast<int>(map.width),
                CV_32FC1);
  for (std::size_t y = 0; y < map.height; ++y)
    for (std::size_t x = 0; x < map.width; ++x)
      small.at<float>(static_cast<int>(y), static_cast<int>(x)) =
          static_cast<float>(map.map[y * map.width + x]);
  cv::Mat upsampled;
  cv::resize(small, upsampled, original.size(), 0, 0, cv::INTER_LINEAR);

  cv::Mat map_u8;
  upsampled.convertTo(map_u8, CV_8UC1, 255.0);
  cv::Mat heat;
  cv::applyColorMap(map_u8, heat, cv::COLORMAP_JET);

  cv::Mat blended;
  cv::addWeighted(heat, opacity, original, 1.0 - opacity, 0.0, blended);
  if (!cv::imwrite(output_path, blended, {cv::IMWRITE_PNG_COMPRESSION, 6}))
    throw IoError("cannot write overlay: " + output_path);

  std::ofstream sidecar(output_path + ".txt", std::ios::trunc);
  if (!sidecar) throw IoError("cannot write sidecar for " + output_path);
  sidecar << "layer=" << map.layer << "\n"
          << "output_index=" << map.output_index << "\n"
          << "map_height=" << map.height << "\n"
          << "map_width=" << map.width << "\n"
          << "normalization_max=" << detail::format_value(map.normalization_max)
          << "\n"
          << "opacity=" << detail::format_value(opacity) << "\n";
  if (!sidecar) throw IoError("failed writing sidecar for " + output_path);
}

}  // namespace aesthnet
