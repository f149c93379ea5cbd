#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace loom {

/// Single-channel intensity raster. Intensities are reals in [0,255], stored
/// row-major; pixel (x, y) has image coordinates u = x, v = y.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;
  int time_index = 0;

  Frame() = default;
  Frame(int w, int h, double fill = 0.0, int t = 0)
      : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill), time_index(t) {}

  double& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }

  /// Replicate-edge access for any integer coordinate.
  double clamped(int x, int y) const;

  size_t size() const { return pixels.size(); }
  bool empty() const { return pixels.empty(); }

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Interleaved RGB raster, channel values in [0,255].
struct ColorFrame {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;

  ColorFrame() = default;
  ColorFrame(int w, int h) : width(w), height(h), rgb(3 * static_cast<size_t>(w) * h, 0.0) {}

  double* px(int x, int y) { return &rgb[3 * (static_cast<size_t>(y) * width + x)]; }
  const double* px(int x, int y) const { return &rgb[3 * (static_cast<size_t>(y) * width + x)]; }

  friend bool operator==(const ColorFrame&, const ColorFrame&) = default;
};

/// Luma with BT.601 weights, kept in real arithmetic.
Frame to_grayscale(const ColorFrame& c);

/// Crops both frames to the common (minimum) size around their centres.
/// Odd margins lose the extra pixel on the bottom/right.
std::pair<Frame, Frame> center_crop_common(const Frame& a, const Frame& b);

/// Crops a window of size w x h starting at (x0, y0).
Frame crop(const Frame& f, int x0, int y0, int w, int h);

/// Normalized 1-D Gaussian taps of length 2*radius+1.
std::vector<double> gaussian_kernel(double sigma, int radius);

/// Separable correlation with a symmetric kernel, replicate borders.
Frame separable_filter(const Frame& f, std::span<const double> kernel);

/// Gaussian blur (sigma 1, radius 3) followed by 2:1 decimation starting at
/// index 0. Output dimensions are ceil(dim / 2).
Frame downsample_half(const Frame& f);

}  // namespace loom
