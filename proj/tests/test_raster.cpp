#include <doctest.h>

#include <random>

#include "loom/error.hpp"
#include "loom/raster.hpp"
#include "support.hpp"

using namespace loom;
using loom::testing::make_frame;

TEST_CASE("to_grayscale uses BT.601 weights without rounding") {
  ColorFrame black(4, 3);
  CHECK(to_grayscale(black) == Frame(4, 3, 0.0));

  ColorFrame white(2, 2);
  std::fill(white.rgb.begin(), white.rgb.end(), 255.0);
  for (double p : to_grayscale(white).pixels) CHECK(p == doctest::Approx(255.0).epsilon(1e-15));

  ColorFrame red(1, 1);
  red.px(0, 0)[0] = 100.0;
  CHECK(to_grayscale(red).pixels[0] == doctest::Approx(29.9).epsilon(1e-15));
}

TEST_CASE("to_grayscale stays inside [0,255]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.0, 255.0);
  for (int trial = 0; trial < 50; ++trial) {
    ColorFrame c(9, 7);
    for (double& v : c.rgb) v = (rng() % 4 == 0) ? 255.0 : d(rng);
    for (double p : to_grayscale(c).pixels) {
      CHECK(p >= 0.0);
      CHECK(p <= 255.0);
    }
  }
}

TEST_CASE("center_crop_common") {
  SUBCASE("642x480 and 640x478") {
    const Frame a = make_frame(642, 480, [](double x, double y) { return x + 1000 * y; });
    const Frame b = make_frame(640, 478, [](double x, double y) { return x + 1000 * y; });
    const auto [ca, cb] = center_crop_common(a, b);
    CHECK(ca.width == 640);
    CHECK(ca.height == 478);
    CHECK(cb == b);
    // One column off each side, one row off top and bottom.
    CHECK(ca.at(0, 0) == a.at(1, 1));
    CHECK(ca.at(639, 477) == a.at(640, 478));
  }
  SUBCASE("identical dimensions pass through") {
    std::mt19937_64 rng(1);
    const Frame a = loom::testing::random_frame(rng, 33, 17);
    const Frame b = loom::testing::random_frame(rng, 33, 17);
    const auto [ca, cb] = center_crop_common(a, b);
    CHECK(ca == a);
    CHECK(cb == b);
  }
  SUBCASE("odd margin goes bottom/right") {
    const Frame a = make_frame(100, 100, [](double x, double) { return x; });
    const Frame b(97, 100);
    const auto [ca, cb] = center_crop_common(a, b);
    CHECK(ca.width == 97);
    CHECK(ca.at(0, 0) == 1.0);    // 1 px removed on the left
    CHECK(ca.at(96, 0) == 97.0);  // columns 98, 99 removed on the right
  }
  SUBCASE("idempotent") {
    std::mt19937_64 rng(9);
    const Frame a = loom::testing::random_frame(rng, 41, 30);
    const Frame b = loom::testing::random_frame(rng, 36, 33);
    const auto once = center_crop_common(a, b);
    const auto twice = center_crop_common(once.first, once.second);
    CHECK(twice.first == once.first);
    CHECK(twice.second == once.second);
  }
  SUBCASE("empty input") { CHECK_THROWS_AS(center_crop_common(Frame(), Frame(3, 3)), DimensionError); }
}

TEST_CASE("downsample_half") {
  SUBCASE("constant frame stays constant everywhere") {
    const Frame out = downsample_half(Frame(31, 20, 50.0));
    CHECK(out.width == 16);
    CHECK(out.height == 10);
    for (double p : out.pixels) CHECK(p == doctest::Approx(50.0).epsilon(1e-14));
  }
  SUBCASE("dimensions") {
    const Frame out = downsample_half(Frame(320, 240));
    CHECK(out.width == 160);
    CHECK(out.height == 120);
  }
  SUBCASE("ramp maps to doubled ramp on the interior") {
    const Frame ramp = make_frame(64, 48, [](double x, double) { return x; });
    const Frame out = downsample_half(ramp);
    for (int y = 0; y < out.height; ++y)
      for (int x = 2; x < out.width - 2; ++x) CHECK(std::abs(out.at(x, y) - 2.0 * x) < 1e-6);
  }
  SUBCASE("too small") { CHECK_THROWS_AS(downsample_half(Frame(1, 5)), DimensionError); }
}
