#include "loom/raster.hpp"

#include <algorithm>
#include <cmath>

#include "loom/error.hpp"

namespace loom {

double Frame::clamped(int x, int y) const {
  x = std::clamp(x, 0, width - 1);
  y = std::clamp(y, 0, height - 1);
  return at(x, y);
}

Frame to_grayscale(const ColorFrame& c) {
  Frame out(c.width, c.height);
  for (size_t i = 0; i < out.pixels.size(); ++i) {
    const double* p = &c.rgb[3 * i];
    out.pixels[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  }
  return out;
}

Frame crop(const Frame& f, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > f.width || y0 + h > f.height)
    throw DimensionError("crop window outside frame");
  Frame out(w, h, 0.0, f.time_index);
  for (int y = 0; y < h; ++y)
    std::copy_n(&f.pixels[static_cast<size_t>(y + y0) * f.width + x0], w,
                &out.pixels[static_cast<size_t>(y) * w]);
  return out;
}

std::pair<Frame, Frame> center_crop_common(const Frame& a, const Frame& b) {
  if (a.empty() || b.empty()) throw DimensionError("center_crop_common: empty frame");
  const int w = std::min(a.width, b.width);
  const int h = std::min(a.height, b.height);
  auto centered = [w, h](const Frame& f) {
    if (f.width == w && f.height == h) return f;
    return crop(f, (f.width - w) / 2, (f.height - h) / 2, w, h);
  };
  return {centered(a), centered(b)};
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
  std::vector<double> k(static_cast<size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[static_cast<size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

Frame separable_filter(const Frame& f, std::span<const double> kernel) {
  const int r = static_cast<int>(kernel.size() / 2);
  Frame tmp(f.width, f.height, 0.0, f.time_index);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      double s = 0.0;
      for (int k = -r; k <= r; ++k) s += kernel[static_cast<size_t>(k + r)] * f.clamped(x + k, y);
      tmp.at(x, y) = s;
    }
  }
  Frame out(f.width, f.height, 0.0, f.time_index);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      double s = 0.0;
      for (int k = -r; k <= r; ++k) s += kernel[static_cast<size_t>(k + r)] * tmp.clamped(x, y + k);
      out.at(x, y) = s;
    }
  }
  return out;
}

Frame downsample_half(const Frame& f) {
  if (f.width < 2 || f.height < 2) throw DimensionError("downsample_half: frame smaller than 2x2");
  static const std::vector<double> kernel = gaussian_kernel(1.0, 3);
  const Frame blurred = separable_filter(f, kernel);
  const int w = (f.width + 1) / 2;
  const int h = (f.height + 1) / 2;
  Frame out(w, h, 0.0, f.time_index);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = blurred.at(2 * x, 2 * y);
  return out;
}

}  // namespace loom
