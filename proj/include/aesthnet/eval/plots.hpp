#pragma once

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "aesthnet/core/error.hpp"
#include "aesthnet/eval/report.hpp"

namespace aesthnet {

namespace detail {

inline void write_png(const std::string& path, const cv::Mat& image) {
  // Fixed compression level keeps reruns byte-identical.
  if (!cv::imwrite(path, image, {cv::IMWRITE_PNG_COMPRESSION, 6}))
    throw IoError("cannot write image: " + path);
}

}  // namespace detail

/// Ground-truth vs prediction scatter. Axis limits come from the data with a
/// small symmetric margin; the diagonal is drawn for reference.
inline void write_scatter_png(const std::string& path,
                              const std::vector<std::pair<double, double>>& pairs,
                              const std::string& title = "") {
  if (pairs.empty()) throw ValidationError("no scatter points");
  const int side = 640, margin = 56;
  cv::Mat canvas(side, side, CV_8UC3, cv::Scalar(255, 255, 255));
  double lo = pairs[0].first, hi = pairs[0].first;
  for (const auto& [g, p] : pairs) {
    lo = std::min({lo, g, p});
    hi = std::max({hi, g, p});
  }
  if (hi <= lo) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const auto to_px = [&](double v) {
    return margin + static_cast<int>(std::lround(
                        (v - lo) / (hi - lo) * (side - 2 * margin)));
  };
  const cv::Scalar axis(30, 30, 30), diag(190, 190, 190), dot(180, 90, 0);
  cv::rectangle(canvas, {margin, margin}, {side - margin, side - margin}, axis);
  cv::line(canvas, {to_px(lo), side - to_px(lo)}, {to_px(hi), side - to_px(hi)},
           diag);
  for (const auto& [g, p] : pairs)
    cv::circle(canvas, {to_px(g), side - to_px(p)}, 2, dot, cv::FILLED,
               cv::LINE_8);
  if (!title.empty())
    cv::putText(canvas, title, {margin, margin - 16}, cv::FONT_HERSHEY_SIMPLEX,
                0.6, axis, 1, cv::LINE_8);
  detail::write_png(path, canvas);
}

/// Correlation matrix as a colored grid; undefined cells are hatched gray.
inline void write_heatmap_png(const std::string& path,
                              const CorrelationMatrix& matrix) {
  const std::size_t k = matrix.size();
  if (k == 0) throw ValidationError("empty correlation matrix");
  const int cell = 48, label_band = 140;
  const int side_w = label_band + cell * static_cast<int>(k) + 8;
  const int side_h = cell * static_cast<int>(k) + 16;
  cv::Mat canvas(side_h, side_w, CV_8UC3, cv::Scalar(255, 255, 255));

  // Map rho in [-1,1] through the JET palette.
  cv::Mat ramp(1, 256, CV_8UC1);
  for (int i = 0; i < 256; ++i) ramp.at<unsigned char>(0, i) =
      static_cast<unsigned char>(i);
  cv::Mat palette;
  cv::applyColorMap(ramp, palette, cv::COLORMAP_JET);

  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const int x0 = label_band + static_cast<int>(j) * cell;
      const int y0 = 8 + static_cast<int>(i) * cell;
      cv::Rect r(x0, y0, cell - 2, cell - 2);
      if (!matrix.defined[i][j]) {
        cv::rectangle(canvas, r, cv::Scalar(200, 200, 200), cv::FILLED);
        cv::line(canvas, {x0, y0}, {x0 + cell - 2, y0 + cell - 2},
                 cv::Scalar(120, 120, 120));
        continue;
      }
      const double v = std::clamp(matrix.values[i][j], -1.0, 1.0);
      const int idx = static_cast<int>(std::lround((v + 1.0) / 2.0 * 255.0));
      cv::rectangle(canvas, r, palette.at<cv::Vec3b>(0, idx), cv::FILLED);
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.2f", v);
      cv::putText(canvas, buf, {x0 + 4, y0 + cell / 2 + 4},
                  cv::FONT_HERSHEY_SIMPLEX, 0.35, cv::Scalar(20, 20, 20), 1,
                  cv::LINE_8);
    }
    cv::putText(canvas, matrix.labels[i],
                {4, 8 + static_cast<int>(i) * cell + cell / 2 + 4},
                cv::FONT_HERSHEY_SIMPLEX, 0.38, cv::Scalar(20, 20, 20), 1,
                cv::LINE_8);
  }
  detail::write_png(path, canvas);
}

/// Writes the PNG companions next to a report's CSVs.
inline void write_report_plots(const EvalReport& report,
                               const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  for (const auto& column : report.columns)
    write_scatter_png(
        (fs::path(directory) / ("scatter_" + column.label + ".png")).string(),
        column.scatter, column.label);
  write_heatmap_png(
      (fs::path(directory) / "correlation_matrix.png").string(),
      report.gt_correlations);
}

}  // namespace aesthnet
