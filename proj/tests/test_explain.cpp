#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "aesthnet/data/image.hpp"
#include "aesthnet/explain/gradcam.hpp"
#include "aesthnet/explain/overlay.hpp"
#include "aesthnet/nn/network.hpp"
#include "fixtures.hpp"

using namespace aesthnet;

namespace {

EncodedBatch<float> one_image_batch(const std::filesystem::path& png,
                                    std::size_t resolution) {
  Tensor<float> img =
      encode_image<float>(png.string(), resolution, Preprocess::kUnit);
  EncodedBatch<float> batch;
  batch.images = Tensor<float>({1, img.dim(0), img.dim(1), img.dim(2)});
  std::copy(img.data(), img.data() + img.size(), batch.images.data());
  batch.targets = Tensor<float>({1, 1}, 0.0f);
  return batch;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("grad-cam map geometry, range, and normalization") {
  auto dir = fixtures::fresh_dir("gradcam");
  fixtures::write_image(dir / "photo.png", 48, 0.65, 31);
  auto net = fixtures::tiny_network(3, 0.0, 41);
  auto batch = one_image_batch(dir / "photo.png", net.input_resolution());

  ActivationMap deep = grad_cam(net, batch, 0, "block5_conv3");
  // 32 px input: four pools before block5 leave a 2x2 activation
  REQUIRE(deep.layer == "block5_conv3");
  REQUIRE(deep.height == 2);
  REQUIRE(deep.width == 2);
  REQUIRE(deep.map.size() == 4);

  ActivationMap mid = grad_cam(net, batch, 1, "block4_conv3");
  REQUIRE(mid.height == 4);
  REQUIRE(mid.width == 4);
  REQUIRE(mid.output_index == 1);

  for (const ActivationMap* m : {&deep, &mid}) {
    for (double v : m->map) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
    const double top = *std::max_element(m->map.begin(), m->map.end());
    if (m->normalization_max > 0.0) {
      REQUIRE(top == Catch::Approx(1.0));
    } else {
      REQUIRE(top == 0.0);
    }
  }

  SECTION("deterministic across calls") {
    ActivationMap again = grad_cam(net, batch, 0, "block5_conv3");
    REQUIRE(again.map == deep.map);
    REQUIRE(again.normalization_max == deep.normalization_max);
  }

  SECTION("invariant under positive scaling of the output weights") {
    for (auto& p : net.parameters())
      if (p.name == "output/weight")
        for (std::size_t i = 0; i < p.value->size(); ++i) (*p.value)[i] *= 3.0f;
    ActivationMap scaled = grad_cam(net, batch, 0, "block5_conv3");
    REQUIRE(scaled.normalization_max ==
            Catch::Approx(3.0 * deep.normalization_max).epsilon(1e-5));
    for (std::size_t i = 0; i < deep.map.size(); ++i)
      REQUIRE(scaled.map[i] == Catch::Approx(deep.map[i]).margin(1e-5));
  }
}

TEST_CASE("grad-cam on a head with zero output weights is identically zero") {
  auto dir = fixtures::fresh_dir("gradcam_zero");
  fixtures::write_image(dir / "photo.png", 48, 0.4, 32);
  auto net = fixtures::tiny_network(2, 0.0, 42);
  for (auto& p : net.parameters())
    if (p.name == "output/weight")
      std::fill(p.value->data(), p.value->data() + p.value->size(), 0.0f);

  auto batch = one_image_batch(dir / "photo.png", net.input_resolution());
  ActivationMap map = grad_cam(net, batch, 0, "block5_conv3");
  REQUIRE(map.normalization_max == 0.0);
  for (double v : map.map) REQUIRE(v == 0.0);
}

TEST_CASE("grad-cam validates layer, output index, and batch size") {
  auto dir = fixtures::fresh_dir("gradcam_errors");
  fixtures::write_image(dir / "photo.png", 48, 0.5, 33);
  auto net = fixtures::tiny_network(3, 0.0, 43);
  auto batch = one_image_batch(dir / "photo.png", net.input_resolution());

  REQUIRE_THROWS_WITH(grad_cam(net, batch, 0, "block9_conv1"),
                      Catch::Matchers::ContainsSubstring("unknown backbone"));
  REQUIRE_THROWS_AS(grad_cam(net, batch, 0, "fc1"), ValidationError);
  REQUIRE_THROWS_WITH(grad_cam(net, batch, 3, "block5_conv3"),
                      Catch::Matchers::ContainsSubstring("out of range"));

  EncodedBatch<float> two;
  two.images = Tensor<float>({2, 32, 32, 3}, 0.1f);
  two.targets = Tensor<float>({2, 1}, 0.0f);
  REQUIRE_THROWS_AS(grad_cam(net, two, 0, "block5_conv3"), ValidationError);
}

TEST_CASE("overlay writes a blended png with a sidecar") {
  auto dir = fixtures::fresh_dir("overlay");
  fixtures::write_image(dir / "photo.png", 48, 0.7, 34);
  auto net = fixtures::tiny_network(3, 0.0, 44);
  auto batch = one_image_batch(dir / "photo.png", net.input_resolution());
  ActivationMap map =
      grad_cam(net, batch, 0, "block5_conv3", (dir / "photo.png").string());

  const std::string out = (dir / "photo_cam.png").string();
  overlay(map, (dir / "photo.png").string(), out, 0.5);
  REQUIRE(std::filesystem::file_size(out) > 0);

  const std::string sidecar = slurp(out + ".txt");
  REQUIRE(sidecar.find("layer=block5_conv3\n") != std::string::npos);
  REQUIRE(sidecar.find("output_index=0\n") != std::string::npos);
  REQUIRE(sidecar.find("map_height=2\n") != std::string::npos);
  REQUIRE(sidecar.find("map_width=2\n") != std::string::npos);
  REQUIRE(sidecar.find("normalization_max=") != std::string::npos);
  REQUIRE(sidecar.find("opacity=0.5\n") != std::string::npos);

  // reruns are byte-identical (fixed PNG compression level)
  const std::string png = slurp(out);
  overlay(map, (dir / "photo.png").string(), out, 0.5);
  REQUIRE(slurp(out) == png);

  REQUIRE_THROWS_AS(overlay(map, (dir / "photo.png").string(), out, 0.0),
                    ValidationError);
  REQUIRE_THROWS_AS(overlay(map, (dir / "photo.png").string(), out, 1.0),
                    ValidationError);
  REQUIRE_THROWS_AS(overlay(map, (dir / "missing.png").string(), out, 0.5),
                    IoError);
}
