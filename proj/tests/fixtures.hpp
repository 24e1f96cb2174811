#pragma once

// Shared synthetic fixtures: tiny PNGs on disk, a 3-target custom schema,
// and small networks sized so whole-pipeline tests run in seconds.

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aesthnet/aesthnet.hpp"

namespace fixtures {

namespace fs = std::filesystem;
using namespace aesthnet;

inline fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("aesthnet_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline unsigned char clamp_u8(double v) {
  return static_cast<unsigned char>(v < 0 ? 0 : v > 255 ? 255 : v);
}

/// Deterministic PNG whose mean brightness tracks `level` in [0,1]; a seeded
/// blocky noise pattern gives the convolutions structure to react to.
inline void write_image(const fs::path& path, std::size_t size, double level,
                        std::uint64_t seed) {
  cv::Mat img(static_cast<int>(size), static_cast<int>(size), CV_8UC3);
  Rng rng(seed);
  double noise[64];
  for (double& v : noise) v = rng.uniform();
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      const double n = noise[(y / 4 % 8) * 8 + (x / 4 % 8)];
      const double base = 40.0 + 150.0 * level;
      const double gx = 30.0 * x / static_cast<double>(size);
      const double gy = 30.0 * y / static_cast<double>(size);
      img.at<cv::Vec3b>(y, x) =
          cv::Vec3b(clamp_u8(base + 40.0 * n + gx),
                    clamp_u8(base + 30.0 * n + gy),
                    clamp_u8(base + 20.0 * n + gx - gy));
    }
  }
  if (!cv::imwrite(path.string(), img))
    throw IoError("fixture image write failed: " + path.string());
}

/// overall in [0,1], contrast in [0,1], sharpness in [-1,1].
inline AttributeSchema tiny_schema() {
  return AttributeSchema(
      BenchmarkId::kCustom, "tiny", {"contrast", "sharpness"},
      TargetRange{0.0, 1.0}, {TargetRange{0.0, 1.0}, TargetRange{-1.0, 1.0}});
}

/// n images on disk plus records against tiny_schema(). Splits repeat
/// train,train,val,test; overall score rises linearly with the index and the
/// image brightness follows it, so training has signal to pick up.
inline std::vector<ImageRecord> make_dataset(const fs::path& dir,
                                             std::size_t n,
                                             std::size_t image_size = 32) {
  const AttributeSchema schema = tiny_schema();
  std::vector<ImageRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    const double overall =
        n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n - 1);
    fs::path img = dir / ("img_" + std::to_string(i) + ".png");
    write_image(img, image_size, overall, 1000 + i);
    ImageRecord rec;
    rec.image_path = img.string();
    rec.raw_targets = {overall, 1.0 - overall, 2.0 * overall - 1.0};
    rec.normalized_targets = schema.normalize(rec.raw_targets);
    rec.split = (i % 4 == 2)   ? Split::kVal
                : (i % 4 == 3) ? Split::kTest
                               : Split::kTrain;
    rec.has_split = true;
    records.push_back(std::move(rec));
  }
  return records;
}

/// Full VGG backbone with a shrunken head, seeded, 32 px input.
inline MultiTaskNetwork<float> tiny_network(std::size_t outputs,
                                            double dropout = 0.0,
                                            std::uint64_t seed = 7) {
  HeadSpec spec;
  spec.outputs = outputs;
  spec.dropout = dropout;
  spec.hidden1 = 16;
  spec.hidden2 = 8;
  MultiTaskNetwork<float> net(spec);
  net.init_parameters(seed);
  net.set_input_resolution(32);
  net.set_schema_name("tiny");
  return net;
}

/// Random [N,3,H,W] input batch in roughly the preprocessed value range.
template <typename S>
Tensor<S> random_input(std::size_t n, std::size_t hw, std::uint64_t seed) {
  Tensor<S> x({n, 3, hw, hw});
  Rng rng(seed);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = static_cast<S>(rng.uniform(-60.0, 60.0));
  return x;
}

}  // namespace fixtures
