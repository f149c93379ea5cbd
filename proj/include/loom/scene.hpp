#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "loom/looming.hpp"
#include "loom/raster.hpp"

namespace loom {

/// Flat textured rectangle at constant depth, parallel to the image plane.
/// Position and size are world units; start is the rectangle centre at t = 0.
struct Sprite {
  double depth = 20.0;
  double size_w = 4.0;
  double size_h = 3.0;
  double start_x = 0.0;
  double start_y = 0.0;
  double vel_x = 0.0;
  double vel_y = 0.0;
  double albedo_offset = 0.0;

  friend bool operator==(const Sprite&, const Sprite&) = default;
};

/// A camera translating toward a fronto-parallel textured board, plus
/// optional billboard sprites. Defaults are the desk-scale approach scene.
struct SceneSpec {
  int width = 320;
  int height = 240;
  CameraIntrinsics intrinsics{300.0, 300.0, 160.0, 120.0};
  double plane_depth = 40.0;
  std::uint64_t texture_seed = 7;
  double texture_scale = 0.8;
  double vel_x = 0.0;
  double vel_y = 0.0;
  double vel_z = 0.5;
  int frames = 20;
  std::vector<Sprite> sprites;

  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

/// Throws SceneError if the camera would reach the board or a sprite, or any
/// field is out of range.
void validate(const SceneSpec& s);

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

/// Hash of lattice corner (i, j) mapped to [0, 255].
double lattice_value(std::uint64_t seed, std::int64_t i, std::int64_t j);

/// Bilinear value noise over a square lattice of cell size `scale`.
double texture_value(std::uint64_t seed, double X, double Y, double scale);

/// Texture seed used for sprite n (0-based).
std::uint64_t sprite_seed(std::uint64_t scene_seed, std::size_t n);

/// Index of the sprite covering image point (u, v) at frame t, or -1. Later
/// sprites win.
int sprite_at(const SceneSpec& s, int t, double u, double v);

/// Scene intensity along the ray through image point (u, v) at frame t.
double sample_scene(const SceneSpec& s, int t, double u, double v);

Frame render_frame(const SceneSpec& s, int t);

/// Exact displacement of every pixel from frame t to t + 1.
FlowField true_flow(const SceneSpec& s, int t);

/// Sprite pixels whose motion direction differs from the background's.
DetectionMask true_mask(const SceneSpec& s, int t);

/// FoE of the background motion, or nullopt when the camera does not move
/// forward.
std::optional<FocusOfExpansion> scene_foe(const SceneSpec& s);

}  // namespace loom
