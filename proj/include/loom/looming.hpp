#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "loom/flow.hpp"

namespace loom {

/// Pinhole intrinsics in pixels.
struct CameraIntrinsics {
  double fx = 300.0;
  double fy = 300.0;
  double cx = 160.0;
  double cy = 120.0;

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// Horizontal and vertical angular rates (radians/frame).
struct AngularRates {
  int width = 0;
  int height = 0;
  std::vector<double> theta_dot, phi_dot;
  std::vector<std::uint8_t> valid;
};

enum class RatioMode { pixel, angular };

/// Which component sits in the numerator. The default puts the horizontal
/// rate on top so that the column through the FoE maps to ratios near zero.
enum class RatioOrientation { theta_over_phi, phi_over_theta };

/// Per-pixel looming ratio. Ratios are stored at float precision, the
/// precision of the on-disk format.
struct LoomingMap {
  int width = 0;
  int height = 0;
  std::vector<float> ratio;
  std::vector<std::uint8_t> valid;
  RatioMode mode = RatioMode::pixel;

  LoomingMap() = default;
  LoomingMap(int w, int h, RatioMode m)
      : width(w), height(h), ratio(static_cast<size_t>(w) * h, 0.0f), valid(static_cast<size_t>(w) * h, 0), mode(m) {}

  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }

  friend bool operator==(const LoomingMap&, const LoomingMap&) = default;
};

struct LoomingParams {
  RatioMode mode = RatioMode::pixel;
  RatioOrientation orientation = RatioOrientation::theta_over_phi;
  double eps_den = 1e-3;  ///< px/frame, applied to the denominator flow component
  double r_max = 100.0;
  double tau_mag = 0.5;   ///< px/frame
};

struct FocusOfExpansion {
  double x0 = 0.0;
  double y0 = 0.0;
  double rms_residual = 0.0;
  double condition = 1.0;
};

struct Component {
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  std::size_t pixel_count = 0;
  double centroid_x = 0.0, centroid_y = 0.0;
};

struct DetectionMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> moving;
  std::vector<Component> components;

  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
  std::size_t moving_count() const;
};

struct DetectParams {
  double tau_mag = 0.5;   ///< px/frame
  double tau_dir = 0.35;  ///< rad
  int min_area = 25;      ///< px
  /// Compare flow lines instead of directions, ignoring whether the flow
  /// points away from or toward the FoE (the plain component-ratio test).
  bool unsigned_ratio = false;
};

/// Horizontal (theta) and vertical (phi) viewing angles of an image point.
std::pair<double, double> pixel_to_angles(const CameraIntrinsics& k, double u, double v);

AngularRates flow_to_angular_rates(const FlowField& flow, const CameraIntrinsics& k);

/// Ratio of horizontal to vertical motion at every pixel.
LoomingMap looming_transform(const FlowField& flow, const std::optional<CameraIntrinsics>& k,
                             const LoomingParams& p = {});

/// Least-squares intersection of the flow lines of all valid pixels with
/// |d| >= tau_mag. Throws DegenerateGeometryError when the normal matrix is
/// singular or its condition number exceeds 1e8.
FocusOfExpansion estimate_foe(const FlowField& flow, double tau_mag);

/// Refits the FoE on pixels whose flow direction agrees with the radial
/// direction of the current estimate to within tau_dir. Stops early when the
/// inlier fit becomes degenerate, returning the last good estimate.
FocusOfExpansion refine_foe(const FlowField& flow, const FocusOfExpansion& initial, double tau_mag,
                            double tau_dir, int iterations);

/// Ratio field a purely translating camera would see in a static world.
LoomingMap expected_ratio_field(const FocusOfExpansion& foe, const std::optional<CameraIntrinsics>& k,
                                const LoomingParams& p, int width, int height);

/// Signed angle from the outward radial direction to the flow direction,
/// wrapped to (-pi, pi].
double radial_deviation(double du, double dv, double u, double v, const FocusOfExpansion& foe);

DetectionMask detect_moving(const FlowField& flow, const FocusOfExpansion& foe, const DetectParams& p = {});

/// 4-connected labelling in raster order; components below min_area are
/// erased from the mask.
DetectionMask label_components(int width, int height, std::vector<std::uint8_t> moving, int min_area);

}  // namespace loom
