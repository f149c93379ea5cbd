#pragma once

#include <span>
#include <vector>

#include "loom/flow.hpp"
#include "loom/formats.hpp"

namespace loom {

/// One scalar per frame pair, sampled at the video frame rate.
struct MotionTrace {
  std::vector<double> values;
  double fps = 30.0;
};

struct Alignment {
  double offset = 0.0;  ///< seconds; IMU time = video time + offset
  double peak = 0.0;    ///< normalized correlation at the chosen lag
  int lag_frames = 0;
};

/// Mean vertical flow over valid pixels of each field.
MotionTrace vertical_motion_series(std::span<const FlowField> flows, double fps);

/// az minus its median, linearly interpolated at times m / fps for every
/// integer m inside the IMU time span. first_index receives the first m.
std::vector<double> resample_az(const ImuSeries& imu, double fps, long& first_index);

/// Pearson correlation of two equal-length sequences; 0 if either is flat.
double normalized_correlation(std::span<const double> a, std::span<const double> b);

/// Finds the integer-frame lag within +-search_window seconds that maximizes
/// the normalized correlation between the IMU z axis and the trace. Throws
/// AlignmentError when the best correlation is below 0.2.
Alignment estimate_offset(const ImuSeries& imu, const MotionTrace& trace, double search_window);

}  // namespace loom
