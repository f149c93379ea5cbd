#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "loom/flow.hpp"
#include "loom/looming.hpp"
#include "loom/raster.hpp"

namespace loom {

namespace fs = std::filesystem;

/// Accelerometer samples as exported by a phone sensor app.
struct ImuSeries {
  std::vector<double> timestamps;  ///< seconds, strictly increasing
  std::vector<double> ax, ay, az;  ///< m/s^2

  std::size_t size() const { return timestamps.size(); }
};

// Binary PGM (P5, maxval 255). Intensities are rounded half-up on write.
void write_pgm(const Frame& f, const fs::path& path);
Frame read_pgm(const fs::path& path);

// Binary PPM (P6, maxval 255).
void write_ppm(const ColorFrame& c, const fs::path& path);
ColorFrame read_ppm(const fs::path& path);

/// Reads P5 directly or P6 through to_grayscale.
Frame read_gray_image(const fs::path& path);

/// 0 for still pixels, 255 for moving ones.
void write_mask_pgm(const DetectionMask& m, const fs::path& path);

/// Middlebury .flo. Invalid pixels are written as (1e9, 1e9).
void write_flo(const FlowField& flow, const fs::path& path);
FlowField read_flo(const fs::path& path);

/// LMAP: "LOOM 1 <w> <h> <mode>\n", float32 ratios, one validity byte per pixel.
void write_lmap(const LoomingMap& m, const fs::path& path);
LoomingMap read_lmap(const fs::path& path, std::optional<RatioMode> expected = std::nullopt);

/// Gray level 255 * (0.5 + atan(ratio) / pi) for valid pixels, magenta otherwise.
ColorFrame render_viz(const LoomingMap& m);

/// CSV with header "t,ax,ay,az".
ImuSeries read_imu_csv(const fs::path& path);

std::string to_string(RatioMode m);
RatioMode parse_ratio_mode(const std::string& s);

/// dir/frame_000123.pgm
fs::path frame_path(const fs::path& dir, int index);

/// Sorted frame_*.pgm / frame_*.ppm files in dir.
std::vector<fs::path> list_frames(const fs::path& dir);

}  // namespace loom
