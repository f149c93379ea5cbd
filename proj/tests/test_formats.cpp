#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "loom/error.hpp"
#include "loom/formats.hpp"
#include "support.hpp"

using namespace loom;
using loom::testing::slurp;
using loom::testing::spit;
using loom::testing::TempDir;

namespace {

std::string le_f32(float v) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  std::string s(4, '\0');
  for (int k = 0; k < 4; ++k) s[k] = static_cast<char>((u >> (8 * k)) & 0xff);
  return s;
}

std::string le_i32(std::int32_t v) { return le_f32(std::bit_cast<float>(v)); }

// Any finite float32, drawn uniformly over bit patterns.
float random_finite_float(std::mt19937_64& rng) {
  for (;;) {
    const float f = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
    if (std::isfinite(f)) return f;
  }
}

}  // namespace

TEST_CASE("pgm") {
  TempDir dir("pgm");
  SUBCASE("exact bytes") {
    Frame f(2, 1);
    f.at(1, 0) = 255;
    write_pgm(f, dir / "a.pgm");
    CHECK(slurp(dir / "a.pgm") == std::string("P5\n2 1\n255\n\x00\xff", 13));
  }
  SUBCASE("half-up rounding") {
    Frame f(3, 1);
    f.at(0, 0) = 127.5;
    f.at(1, 0) = 0.49999;
    f.at(2, 0) = 254.5;
    write_pgm(f, dir / "r.pgm");
    const Frame g = read_pgm(dir / "r.pgm");
    CHECK(g.at(0, 0) == 128);
    CHECK(g.at(1, 0) == 0);
    CHECK(g.at(2, 0) == 255);
  }
  SUBCASE("out of range intensity") {
    Frame f(1, 1, 255.7);
    CHECK_THROWS_AS(write_pgm(f, dir / "x.pgm"), FormatError);
    f.at(0, 0) = -0.6;
    CHECK_THROWS_AS(write_pgm(f, dir / "x.pgm"), FormatError);
  }
  SUBCASE("random integer frames round-trip") {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 1000; ++k) {
      const int w = 1 + static_cast<int>(rng() % 23), h = 1 + static_cast<int>(rng() % 17);
      Frame f(w, h);
      for (double& p : f.pixels) p = static_cast<double>(rng() % 256);
      write_pgm(f, dir / "rt.pgm");
      const Frame g = read_pgm(dir / "rt.pgm");
      REQUIRE(g.width == w);
      REQUIRE(g.pixels == f.pixels);
    }
  }
  SUBCASE("header comments and whitespace") {
    spit(dir / "c.pgm", std::string("P5 # comment\n 2\t1\n# another\n255\n\x07\x08", 34));
    const Frame f = read_pgm(dir / "c.pgm");
    CHECK(f.width == 2);
    CHECK(f.at(0, 0) == 7);
    CHECK(f.at(1, 0) == 8);
  }
  SUBCASE("malformed inputs") {
    spit(dir / "m.pgm", std::string("P5\n2 1\n65535\n\x00\x00\x00\x00", 17));
    CHECK_THROWS_AS(read_pgm(dir / "m.pgm"), FormatError);
    spit(dir / "t.pgm", std::string("P5\n4 4\n255\n\x01\x02", 13));
    CHECK_THROWS_AS(read_pgm(dir / "t.pgm"), FormatError);
    spit(dir / "h.pgm", "P5\n4");
    CHECK_THROWS_AS(read_pgm(dir / "h.pgm"), FormatError);
    spit(dir / "b.pgm", "P2\n1 1\n255\n0\n");
    CHECK_THROWS_AS(read_pgm(dir / "b.pgm"), FormatError);
    spit(dir / "n.pgm", "P5\nx 1\n255\n\x00");
    CHECK_THROWS_AS(read_pgm(dir / "n.pgm"), FormatError);
    CHECK_THROWS_AS(read_pgm(dir / "missing.pgm"), FormatError);
  }
  SUBCASE("sequence naming") {
    CHECK(frame_path("seq", 123).string() == "seq/frame_000123.pgm");
    for (int i : {2, 0, 11}) write_pgm(Frame(1, 1), frame_path(dir.path(), i));
    spit(dir / "notes.txt", "x");
    const auto frames = list_frames(dir.path());
    REQUIRE(frames.size() == 3);
    CHECK(frames[0].filename() == "frame_000000.pgm");
    CHECK(frames[2].filename() == "frame_000011.pgm");
  }
}

TEST_CASE("ppm and grayscale ingestion") {
  TempDir dir("ppm");
  ColorFrame c(2, 1);
  c.px(0, 0)[0] = 255;
  c.px(1, 0)[1] = 10;
  c.px(1, 0)[2] = 200;
  write_ppm(c, dir / "c.ppm");
  CHECK(slurp(dir / "c.ppm") == std::string("P6\n2 1\n255\n\xff\x00\x00\x00\x0a\xc8", 17));
  CHECK(read_ppm(dir / "c.ppm") == c);
  const Frame g = read_gray_image(dir / "c.ppm");
  CHECK(g == to_grayscale(c));
  write_pgm(Frame(1, 1, 9), dir / "p.pgm");
  CHECK(read_gray_image(dir / "p.pgm").at(0, 0) == 9);
}

TEST_CASE("mask pgm") {
  TempDir dir("mask");
  DetectionMask m;
  m.width = 3;
  m.height = 1;
  m.moving = {0, 1, 0};
  write_mask_pgm(m, dir / "m.pgm");
  CHECK(slurp(dir / "m.pgm") == std::string("P5\n3 1\n255\n\x00\xff\x00", 14));
}

TEST_CASE("flo") {
  TempDir dir("flo");
  SUBCASE("exact 20-byte layout") {
    FlowField f(1, 1, 1.5, -2.0);
    write_flo(f, dir / "a.flo");
    const std::string expect = le_f32(202021.25f) + le_i32(1) + le_i32(1) + le_f32(1.5f) + le_f32(-2.0f);
    CHECK(slurp(dir / "a.flo") == expect);
    CHECK(slurp(dir / "a.flo").substr(0, 4) == "PIEH");
  }
  SUBCASE("invalid pixels are stored as 1e9") {
    FlowField f(2, 1, 0.25, 0.5);
    f.valid[1] = 0;
    write_flo(f, dir / "i.flo");
    const std::string bytes = slurp(dir / "i.flo");
    CHECK(bytes.substr(20, 8) == le_f32(1e9f) + le_f32(1e9f));
    const FlowField g = read_flo(dir / "i.flo");
    CHECK(g.valid[0] == 1);
    CHECK(g.valid[1] == 0);
    CHECK(g.du[0] == 0.25);
  }
  SUBCASE("random fields round-trip bit-exactly") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<float> mag(-300.0f, 300.0f);
    for (int k = 0; k < 1000; ++k) {
      const int w = 1 + static_cast<int>(rng() % 19), h = 1 + static_cast<int>(rng() % 13);
      FlowField f(w, h);
      for (size_t i = 0; i < f.size(); ++i) {
        f.valid[i] = rng() % 5 != 0;
        if (!f.valid[i]) continue;
        f.du[i] = k % 2 ? mag(rng) : std::ldexp(static_cast<double>(static_cast<int>(rng() % 2001) - 1000), -7);
        f.dv[i] = static_cast<float>(f.du[i] * 0.37 - 1.0);
        f.du[i] = static_cast<float>(f.du[i]);
      }
      write_flo(f, dir / "rt.flo");
      REQUIRE(read_flo(dir / "rt.flo") == f);
    }
  }
  SUBCASE("errors") {
    spit(dir / "s.flo", le_f32(1.0f) + le_i32(1) + le_i32(1) + le_f32(0) + le_f32(0));
    CHECK_THROWS_AS(read_flo(dir / "s.flo"), FormatError);
    spit(dir / "z.flo", le_f32(202021.25f) + le_i32(2) + le_i32(1) + le_f32(0) + le_f32(0));
    CHECK_THROWS_AS(read_flo(dir / "z.flo"), FormatError);
    spit(dir / "h.flo", le_f32(202021.25f) + le_i32(1));
    CHECK_THROWS_AS(read_flo(dir / "h.flo"), FormatError);
    FlowField bad(1, 1, std::numeric_limits<double>::infinity(), 0.0);
    CHECK_THROWS_AS(write_flo(bad, dir / "bad.flo"), FormatError);
  }
}

TEST_CASE("lmap") {
  TempDir dir("lmap");
  SUBCASE("exact layout") {
    LoomingMap m(1, 1, RatioMode::pixel);
    m.ratio[0] = 0.75f;
    m.valid[0] = 1;
    write_lmap(m, dir / "a.lmap");
    CHECK(slurp(dir / "a.lmap") == "LOOM 1 1 1 pixel\n" + le_f32(0.75f) + std::string("\x01", 1));
  }
  SUBCASE("all-invalid map keeps its validity") {
    LoomingMap m(4, 3, RatioMode::angular);
    write_lmap(m, dir / "n.lmap");
    const LoomingMap g = read_lmap(dir / "n.lmap");
    CHECK(g.mode == RatioMode::angular);
    CHECK(g.valid == m.valid);
    CHECK(g.ratio == m.ratio);
  }
  SUBCASE("random maps round-trip bit-exactly") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 1000; ++k) {
      const int w = 1 + static_cast<int>(rng() % 21), h = 1 + static_cast<int>(rng() % 15);
      LoomingMap m(w, h, k % 3 ? RatioMode::pixel : RatioMode::angular);
      for (size_t i = 0; i < m.ratio.size(); ++i) {
        m.valid[i] = rng() % 4 != 0;
        m.ratio[i] = m.valid[i] ? random_finite_float(rng) : 0.0f;
      }
      write_lmap(m, dir / "rt.lmap");
      const LoomingMap g = read_lmap(dir / "rt.lmap", m.mode);
      REQUIRE(g.width == m.width);
      REQUIRE(g.valid == m.valid);
      REQUIRE(std::memcmp(g.ratio.data(), m.ratio.data(), 4 * m.ratio.size()) == 0);
    }
  }
  SUBCASE("errors") {
    LoomingMap m(2, 2, RatioMode::pixel);
    write_lmap(m, dir / "p.lmap");
    CHECK_THROWS_WITH_AS(read_lmap(dir / "p.lmap", RatioMode::angular), doctest::Contains("mode mismatch"),
                         FormatError);
    const std::string good = slurp(dir / "p.lmap");
    spit(dir / "t.lmap", good.substr(0, good.size() - 1));
    CHECK_THROWS_AS(read_lmap(dir / "t.lmap"), FormatError);
    spit(dir / "m.lmap", "LOOX" + good.substr(4));
    CHECK_THROWS_AS(read_lmap(dir / "m.lmap"), FormatError);
    spit(dir / "v.lmap", "LOOM 2" + good.substr(6));
    CHECK_THROWS_AS(read_lmap(dir / "v.lmap"), FormatError);
    spit(dir / "k.lmap", "LOOM 1 2 2 polar\n" + good.substr(good.find('\n') + 1));
    CHECK_THROWS_AS(read_lmap(dir / "k.lmap"), FormatError);
    std::string badvalid = good;
    badvalid.back() = '\x02';
    spit(dir / "b.lmap", badvalid);
    CHECK_THROWS_AS(read_lmap(dir / "b.lmap"), FormatError);
  }
}

TEST_CASE("render_viz") {
  LoomingMap m(4, 1, RatioMode::pixel);
  m.ratio = {0.0f, 100.0f, -100.0f, 5.0f};
  m.valid = {1, 1, 1, 0};
  const ColorFrame c = render_viz(m);
  CHECK(c.px(0, 0)[0] == 128);
  CHECK(c.px(1, 0)[1] == 254);
  CHECK(c.px(2, 0)[2] == 1);
  CHECK(c.px(3, 0)[0] == 255);
  CHECK(c.px(3, 0)[1] == 0);
  CHECK(c.px(3, 0)[2] == 255);

  SUBCASE("monotone in the ratio") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<float> d(-150.0f, 150.0f);
    LoomingMap r(2000, 1, RatioMode::pixel);
    for (auto& v : r.ratio) v = d(rng);
    std::fill(r.valid.begin(), r.valid.end(), 1);
    std::sort(r.ratio.begin(), r.ratio.end());
    const ColorFrame g = render_viz(r);
    for (int x = 1; x < r.width; ++x) {
      CHECK(g.px(x - 1, 0)[0] <= g.px(x, 0)[0]);
      CHECK(g.px(x, 0)[0] == g.px(x, 0)[1]);
    }
  }
}

TEST_CASE("read_imu_csv") {
  TempDir dir("imu");
  SUBCASE("two rows") {
    spit(dir / "a.csv", "t,ax,ay,az\n0.00,0,0,9.81\n0.01,0,0,9.79\n");
    const ImuSeries s = read_imu_csv(dir / "a.csv");
    REQUIRE(s.size() == 2);
    CHECK(s.timestamps[1] == 0.01);
    CHECK(s.az[0] == 9.81);
    CHECK(s.ax[1] == 0.0);
  }
  SUBCASE("trailing newlines are ignored") {
    spit(dir / "a.csv", "t,ax,ay,az\n0.00,0,0,9.81\n0.01,0,0,9.79\n");
    spit(dir / "b.csv", "t,ax,ay,az\n0.00,0,0,9.81\n0.01,0,0,9.79\n\n\n");
    spit(dir / "c.csv", "t,ax,ay,az\r\n0.00,0,0,9.81\r\n0.01,0,0,9.79");
    const ImuSeries a = read_imu_csv(dir / "a.csv");
    for (const char* n : {"b.csv", "c.csv"}) {
      const ImuSeries b = read_imu_csv(dir / n);
      CHECK(b.timestamps == a.timestamps);
      CHECK(b.az == a.az);
    }
  }
  SUBCASE("errors") {
    spit(dir / "o.csv", "t,ax,ay,az\n0.02,0,0,1\n0.01,0,0,1\n");
    CHECK_THROWS_WITH_AS(read_imu_csv(dir / "o.csv"), doctest::Contains("increasing"), FormatError);
    spit(dir / "d.csv", "t,ax,ay,az\n0.01,0,0,1\n0.01,0,0,1\n");
    CHECK_THROWS_AS(read_imu_csv(dir / "d.csv"), FormatError);
    spit(dir / "c.csv", "t,ax,ay,az\n0.00,0,0\n0.01,0,0,1\n");
    CHECK_THROWS_WITH_AS(read_imu_csv(dir / "c.csv"), doctest::Contains("columns"), FormatError);
    spit(dir / "n.csv", "t,ax,ay,az\n0.00,0,abc,1\n0.01,0,0,1\n");
    CHECK_THROWS_WITH_AS(read_imu_csv(dir / "n.csv"), doctest::Contains("non-numeric"), FormatError);
    spit(dir / "e.csv", "t,ax,ay,az\n0.00,0,0,1\n0.01,0,0,\n");
    CHECK_THROWS_AS(read_imu_csv(dir / "e.csv"), FormatError);
    spit(dir / "k.csv", "t,ax,ay,az\n0,0,0,\"1,5\"\n0.01,0,0,1\n");
    CHECK_THROWS_AS(read_imu_csv(dir / "k.csv"), FormatError);
    spit(dir / "h.csv", "time,ax,ay,az\n0,0,0,1\n0.01,0,0,1\n");
    CHECK_THROWS_AS(read_imu_csv(dir / "h.csv"), FormatError);
    spit(dir / "s.csv", "t,ax,ay,az\n0,0,0,1\n");
    CHECK_THROWS_AS(read_imu_csv(dir / "s.csv"), FormatError);
    CHECK_THROWS_AS(read_imu_csv(dir / "missing.csv"), FormatError);
  }
}
