#include "loom/scene.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "loom/error.hpp"

namespace loom {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

void check_time(int t, int limit) {
  if (t < 0 || t >= limit)
    throw SceneError("frame index " + std::to_string(t) + " outside [0, " + std::to_string(limit) + ")");
}

// Displacement of a point at camera-relative depth z whose world motion
// relative to the camera is (tx, ty, tz) per frame.
void point_flow(const CameraIntrinsics& k, double z, double tx, double ty, double tz, double u, double v,
                double& du, double& dv) {
  if (tz > 0.0) {
    const double gain = tz / (z - tz);
    du = gain * (u - (k.cx + k.fx * tx / tz));
    dv = gain * (v - (k.cy + k.fy * ty / tz));
  } else {
    du = -k.fx * tx / z;
    dv = -k.fy * ty / z;
  }
}

}  // namespace

void validate(const SceneSpec& s) {
  if (s.width < 1 || s.height < 1) throw SceneError("image dimensions must be positive");
  if (!(s.intrinsics.fx > 0.0) || !(s.intrinsics.fy > 0.0)) throw SceneError("focal lengths must be positive");
  if (!(s.texture_scale > 0.0)) throw SceneError("texture_scale must be positive");
  if (s.frames < 1) throw SceneError("frames must be >= 1");
  if (!(s.vel_z >= 0.0)) throw SceneError("vel_z must be >= 0");
  if (!(s.plane_depth - s.frames * s.vel_z > 0.0)) throw SceneError("camera reaches the board within the sequence");
  for (std::size_t n = 0; n < s.sprites.size(); ++n) {
    const Sprite& sp = s.sprites[n];
    const std::string tag = "sprite " + std::to_string(n) + ": ";
    if (!(sp.depth < s.plane_depth)) throw SceneError(tag + "depth must be less than plane_depth");
    if (!(sp.depth - s.frames * s.vel_z > 0.0)) throw SceneError(tag + "camera reaches the sprite within the sequence");
    if (!(sp.size_w > 0.0) || !(sp.size_h > 0.0)) throw SceneError(tag + "size must be positive");
  }
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double lattice_value(std::uint64_t seed, std::int64_t i, std::int64_t j) {
  std::uint64_t h = mix64(seed + kGolden);
  h = mix64(h + kGolden + static_cast<std::uint64_t>(i));
  h = mix64(h + kGolden + static_cast<std::uint64_t>(j));
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 255.0;
}

double texture_value(std::uint64_t seed, double X, double Y, double scale) {
  const double x = X / scale, y = Y / scale;
  const double fx0 = std::floor(x), fy0 = std::floor(y);
  const double tx = x - fx0, ty = y - fy0;
  const auto i = static_cast<std::int64_t>(fx0), j = static_cast<std::int64_t>(fy0);
  const double v00 = lattice_value(seed, i, j);
  const double v10 = lattice_value(seed, i + 1, j);
  const double v01 = lattice_value(seed, i, j + 1);
  const double v11 = lattice_value(seed, i + 1, j + 1);
  const double top = v00 + (v10 - v00) * tx;
  const double bot = v01 + (v11 - v01) * tx;
  return top + (bot - top) * ty;
}

std::uint64_t sprite_seed(std::uint64_t scene_seed, std::size_t n) {
  return mix64(scene_seed + kGolden * (static_cast<std::uint64_t>(n) + 1));
}

int sprite_at(const SceneSpec& s, int t, double u, double v) {
  const CameraIntrinsics& k = s.intrinsics;
  for (int n = static_cast<int>(s.sprites.size()) - 1; n >= 0; --n) {
    const Sprite& sp = s.sprites[static_cast<std::size_t>(n)];
    const double z = sp.depth - t * s.vel_z;
    const double lx = t * s.vel_x + (u - k.cx) * z / k.fx - (sp.start_x + t * sp.vel_x);
    const double ly = t * s.vel_y + (v - k.cy) * z / k.fy - (sp.start_y + t * sp.vel_y);
    if (lx >= -0.5 * sp.size_w && lx < 0.5 * sp.size_w && ly >= -0.5 * sp.size_h && ly < 0.5 * sp.size_h) return n;
  }
  return -1;
}

double sample_scene(const SceneSpec& s, int t, double u, double v) {
  const CameraIntrinsics& k = s.intrinsics;
  const int n = sprite_at(s, t, u, v);
  if (n >= 0) {
    const Sprite& sp = s.sprites[static_cast<std::size_t>(n)];
    const double z = sp.depth - t * s.vel_z;
    const double lx = t * s.vel_x + (u - k.cx) * z / k.fx - (sp.start_x + t * sp.vel_x);
    const double ly = t * s.vel_y + (v - k.cy) * z / k.fy - (sp.start_y + t * sp.vel_y);
    const double val = texture_value(sprite_seed(s.texture_seed, static_cast<std::size_t>(n)), lx, ly,
                                     s.texture_scale) + sp.albedo_offset;
    return std::clamp(val, 0.0, 255.0);
  }
  const double z = s.plane_depth - t * s.vel_z;
  const double X = t * s.vel_x + (u - k.cx) * z / k.fx;
  const double Y = t * s.vel_y + (v - k.cy) * z / k.fy;
  return texture_value(s.texture_seed, X, Y, s.texture_scale);
}

Frame render_frame(const SceneSpec& s, int t) {
  validate(s);
  check_time(t, s.frames);
  Frame f(s.width, s.height, 0.0, t);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) f.at(x, y) = sample_scene(s, t, x, y);
  return f;
}

FlowField true_flow(const SceneSpec& s, int t) {
  validate(s);
  check_time(t, s.frames - 1);
  FlowField out(s.width, s.height);
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const size_t i = out.index(x, y);
      const int n = sprite_at(s, t, x, y);
      if (n >= 0) {
        const Sprite& sp = s.sprites[static_cast<std::size_t>(n)];
        point_flow(s.intrinsics, sp.depth - t * s.vel_z, s.vel_x - sp.vel_x, s.vel_y - sp.vel_y, s.vel_z, x, y,
                   out.du[i], out.dv[i]);
      } else {
        point_flow(s.intrinsics, s.plane_depth - t * s.vel_z, s.vel_x, s.vel_y, s.vel_z, x, y, out.du[i], out.dv[i]);
      }
    }
  }
  return out;
}

DetectionMask true_mask(const SceneSpec& s, int t) {
  validate(s);
  check_time(t, s.frames - 1);
  std::vector<std::uint8_t> moving(static_cast<size_t>(s.width) * s.height, 0);
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const int n = sprite_at(s, t, x, y);
      if (n < 0) continue;
      const Sprite& sp = s.sprites[static_cast<std::size_t>(n)];
      double su, sv, bu, bv;
      point_flow(s.intrinsics, sp.depth - t * s.vel_z, s.vel_x - sp.vel_x, s.vel_y - sp.vel_y, s.vel_z, x, y, su, sv);
      point_flow(s.intrinsics, s.plane_depth - t * s.vel_z, s.vel_x, s.vel_y, s.vel_z, x, y, bu, bv);
      const bool sprite_still = su == 0.0 && sv == 0.0;
      const bool background_still = bu == 0.0 && bv == 0.0;
      bool differs;
      if (sprite_still || background_still) {
        differs = sprite_still != background_still;
      } else {
        // Angle between the two directions via atan2(cross, dot).
        differs = std::abs(std::atan2(bu * sv - bv * su, bu * su + bv * sv)) > 1e-6;
      }
      moving[static_cast<size_t>(y) * s.width + x] = differs ? 1 : 0;
    }
  }
  return label_components(s.width, s.height, std::move(moving), 1);
}

std::optional<FocusOfExpansion> scene_foe(const SceneSpec& s) {
  if (!(s.vel_z > 0.0)) return std::nullopt;
  FocusOfExpansion foe;
  foe.x0 = s.intrinsics.cx + s.intrinsics.fx * s.vel_x / s.vel_z;
  foe.y0 = s.intrinsics.cy + s.intrinsics.fy * s.vel_y / s.vel_z;
  return foe;
}

}  // namespace loom
