#include "loom/imu_sync.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "loom/error.hpp"

namespace loom {

MotionTrace vertical_motion_series(std::span<const FlowField> flows, double fps) {
  if (flows.size() < 2) throw ConfigError("vertical_motion_series needs at least 2 flow fields");
  if (!(fps > 0.0)) throw ConfigError("fps must be positive");
  MotionTrace trace;
  trace.fps = fps;
  for (std::size_t f = 0; f < flows.size(); ++f) {
    const FlowField& flow = flows[f];
    if (flow.width != flows[0].width || flow.height != flows[0].height)
      throw DimensionError("flow field " + std::to_string(f) + " differs in size");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < flow.size(); ++i) {
      if (!flow.valid[i]) continue;
      sum += flow.dv[i];
      ++n;
    }
    if (n == 0) throw DegenerateGeometryError("flow field " + std::to_string(f) + " has no valid pixels");
    trace.values.push_back(sum / static_cast<double>(n));
  }
  return trace;
}

std::vector<double> resample_az(const ImuSeries& imu, double fps, long& first_index) {
  if (imu.size() < 2) throw ConfigError("IMU series needs at least 2 samples");
  std::vector<double> sorted = imu.az;
  const auto mid = sorted.begin() + static_cast<long>(sorted.size() / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  double median = *mid;
  if (sorted.size() % 2 == 0) median = 0.5 * (median + *std::max_element(sorted.begin(), mid));

  const double t0 = imu.timestamps.front(), t1 = imu.timestamps.back();
  first_index = static_cast<long>(std::ceil(t0 * fps));
  const long last = static_cast<long>(std::floor(t1 * fps));
  std::vector<double> out;
  std::size_t seg = 0;
  for (long m = first_index; m <= last; ++m) {
    const double t = static_cast<double>(m) / fps;
    while (seg + 2 < imu.size() && imu.timestamps[seg + 1] < t) ++seg;
    const double ta = imu.timestamps[seg], tb = imu.timestamps[seg + 1];
    const double w = std::clamp((t - ta) / (tb - ta), 0.0, 1.0);
    out.push_back(imu.az[seg] + (imu.az[seg + 1] - imu.az[seg]) * w - median);
  }
  return out;
}

double normalized_correlation(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n == 0) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

Alignment estimate_offset(const ImuSeries& imu, const MotionTrace& trace, double search_window) {
  const double fps = trace.fps;
  if (!(fps > 0.0)) throw ConfigError("fps must be positive");
  if (!(search_window >= 0.0)) throw ConfigError("search window must be non-negative");
  if (trace.values.size() < 2) throw ConfigError("motion trace needs at least 2 samples");
  const double trace_span = static_cast<double>(trace.values.size()) / fps;
  const double imu_span = imu.timestamps.back() - imu.timestamps.front();
  if (trace_span < 2 * search_window || imu_span < 2 * search_window)
    throw ConfigError("signals must cover at least twice the search window");

  long first = 0;
  const std::vector<double> az = resample_az(imu, fps, first);
  const long n = static_cast<long>(trace.values.size());
  const long grid_last = first + static_cast<long>(az.size()) - 1;
  const long max_lag = static_cast<long>(std::floor(search_window * fps + 1e-9));
  const long min_overlap = std::max(3L, std::min(n, static_cast<long>(az.size())) / 2);

  Alignment best;
  best.peak = -2.0;
  for (long lag = -max_lag; lag <= max_lag; ++lag) {
    // trace[k] pairs with az at grid index k + lag.
    const long k0 = std::max(0L, first - lag);
    const long k1 = std::min(n - 1, grid_last - lag);
    if (k1 - k0 + 1 < min_overlap) continue;
    const std::span<const double> a(trace.values.data() + k0, static_cast<std::size_t>(k1 - k0 + 1));
    const std::span<const double> b(az.data() + (k0 + lag - first), a.size());
    const double r = normalized_correlation(a, b);
    if (r > best.peak) {
      best.peak = r;
      best.lag_frames = static_cast<int>(lag);
    }
  }
  if (best.peak < 0.2)
    throw AlignmentError("no alignment: peak correlation " + std::to_string(std::max(best.peak, -1.0)) +
                         " below 0.2");
  best.offset = best.lag_frames / fps;
  return best;
}

}  // namespace loom
