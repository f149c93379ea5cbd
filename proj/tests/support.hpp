#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "loom/flow.hpp"
#include "loom/looming.hpp"
#include "loom/raster.hpp"

namespace loom::testing {

inline Frame make_frame(int w, int h, const std::function<double(double, double)>& f) {
  Frame out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = f(x, y);
  return out;
}

/// Smooth band-limited pattern in [0, 255], translatable by (sx, sy).
inline double sinusoid_texture(double u, double v) {
  return 127.5 + 40.0 * std::sin(0.31 * u + 0.17 * v) + 35.0 * std::cos(0.23 * v - 0.11 * u + 0.7) +
         25.0 * std::sin(0.19 * u + 0.29 * v + 1.3);
}

inline Frame random_frame(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> d(0.0, 255.0);
  Frame f(w, h);
  for (double& p : f.pixels) p = d(rng);
  return f;
}

/// Radial flow about (x0, y0) with gain k.
inline FlowField radial_field(int w, int h, double x0, double y0, double k) {
  FlowField f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      f.du[f.index(x, y)] = k * (x - x0);
      f.dv[f.index(x, y)] = k * (y - y0);
    }
  return f;
}

inline FlowField scaled(const FlowField& f, double s) {
  FlowField out = f;
  for (auto& v : out.du) v *= s;
  for (auto& v : out.dv) v *= s;
  return out;
}

inline double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<long>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("loom_" + tag + "_" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

}  // namespace loom::testing
