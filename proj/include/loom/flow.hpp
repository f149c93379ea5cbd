#pragma once

#include <cstdint>
#include <vector>

#include "loom/raster.hpp"

namespace loom {

/// Per-pixel quadratic model f(x) ~ x^T A x + b^T x + c in local coordinates
/// centred on the pixel (x horizontal, y vertical).
struct PolyExpansion {
  int width = 0;
  int height = 0;
  std::vector<double> c, b1, b2, a11, a12, a22;

  PolyExpansion() = default;
  PolyExpansion(int w, int h);
  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
};

/// Dense displacement field in px/frame. Invalid pixels still carry finite
/// values (the last usable estimate) so they can seed further iterations.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> du, dv;
  std::vector<std::uint8_t> valid;

  FlowField() = default;
  FlowField(int w, int h, double fill_u = 0.0, double fill_v = 0.0);

  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
  size_t size() const { return du.size(); }

  friend bool operator==(const FlowField&, const FlowField&) = default;
};

struct FlowParams {
  int levels = 3;
  int iterations_per_level = 3;
  int poly_n = 7;
  double poly_sigma = 1.5;
  int win_size = 15;
  double lambda = 1e-9;  ///< regularizer, relative to trace of the normal matrix
  int threads = 1;       ///< 0 = hardware concurrency; does not affect results
};

/// Throws ConfigError when a parameter is out of range.
void validate(const FlowParams& p);

/// Weighted least-squares fit of {1, x, y, x^2, y^2, xy} over a poly_n x poly_n
/// Gaussian-weighted window at every pixel (replicate padding).
PolyExpansion poly_expand(const Frame& f, int poly_n, double poly_sigma, int threads = 1);

/// One displacement update. The second expansion is looked up at the nearest
/// pixel to x + prior(x), clamped into the image.
FlowField displacement_step(const PolyExpansion& e1, const PolyExpansion& e2, const FlowField& prior,
                            int win_size, double lambda, int threads = 1);

/// Coarse-to-fine dense flow from f1 to f2.
FlowField farneback_flow(const Frame& f1, const Frame& f2, const FlowParams& p = {});

/// Bilinear 2x upsampling of a flow field to (width, height), values doubled.
FlowField upsample_flow(const FlowField& coarse, int width, int height);

/// Mean Euclidean endpoint error between two fields over pixels at least
/// `border` px from every edge. Validity is ignored.
double mean_endpoint_error(const FlowField& a, const FlowField& b, int border);

}  // namespace loom
