#include "loom/looming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "loom/error.hpp"

namespace loom {

std::size_t DetectionMask::moving_count() const {
  return static_cast<std::size_t>(std::count(moving.begin(), moving.end(), std::uint8_t{1}));
}

std::pair<double, double> pixel_to_angles(const CameraIntrinsics& k, double u, double v) {
  return {std::atan((u - k.cx) / k.fx), std::atan((v - k.cy) / k.fy)};
}

namespace {

double theta_gain(const CameraIntrinsics& k, double u) { return k.fx / (k.fx * k.fx + (u - k.cx) * (u - k.cx)); }
double phi_gain(const CameraIntrinsics& k, double v) { return k.fy / (k.fy * k.fy + (v - k.cy) * (v - k.cy)); }

void check_mode(const std::optional<CameraIntrinsics>& k, const LoomingParams& p) {
  if (p.mode == RatioMode::angular && !k) throw ConfigError("angular ratio mode requires camera intrinsics");
  if (k && (!(k->fx > 0.0) || !(k->fy > 0.0))) throw ConfigError("focal lengths must be positive");
}

// h and v are the horizontal and vertical terms (pixel or angular).
float saturated_ratio(double h, double v, bool flip, double r_max) {
  const double r = flip ? v / h : h / v;
  return static_cast<float>(std::clamp(r, -r_max, r_max));
}

}  // namespace

AngularRates flow_to_angular_rates(const FlowField& flow, const CameraIntrinsics& k) {
  if (!(k.fx > 0.0) || !(k.fy > 0.0)) throw ConfigError("focal lengths must be positive");
  AngularRates out;
  out.width = flow.width;
  out.height = flow.height;
  out.theta_dot.resize(flow.size());
  out.phi_dot.resize(flow.size());
  out.valid = flow.valid;
  for (int y = 0; y < flow.height; ++y) {
    const double gv = phi_gain(k, y);
    for (int x = 0; x < flow.width; ++x) {
      const size_t i = flow.index(x, y);
      out.theta_dot[i] = flow.du[i] * theta_gain(k, x);
      out.phi_dot[i] = flow.dv[i] * gv;
    }
  }
  return out;
}

LoomingMap looming_transform(const FlowField& flow, const std::optional<CameraIntrinsics>& k,
                             const LoomingParams& p) {
  check_mode(k, p);
  const bool flip = p.orientation == RatioOrientation::phi_over_theta;
  LoomingMap out(flow.width, flow.height, p.mode);
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      const size_t i = flow.index(x, y);
      const double du = flow.du[i], dv = flow.dv[i];
      const double den_px = flip ? du : dv;
      if (!flow.valid[i] || std::hypot(du, dv) < p.tau_mag || std::abs(den_px) < p.eps_den) continue;
      double h = du, v = dv;
      if (p.mode == RatioMode::angular) {
        h *= theta_gain(*k, x);
        v *= phi_gain(*k, y);
      }
      out.ratio[i] = saturated_ratio(h, v, flip, p.r_max);
      out.valid[i] = 1;
    }
  }
  return out;
}

LoomingMap expected_ratio_field(const FocusOfExpansion& foe, const std::optional<CameraIntrinsics>& k,
                                const LoomingParams& p, int width, int height) {
  check_mode(k, p);
  const bool flip = p.orientation == RatioOrientation::phi_over_theta;
  LoomingMap out(width, height, p.mode);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const size_t i = out.index(x, y);
      const double ru = x - foe.x0, rv = y - foe.y0;
      if (std::abs(flip ? ru : rv) < p.eps_den) continue;
      double h = ru, v = rv;
      if (p.mode == RatioMode::angular) {
        h *= theta_gain(*k, x);
        v *= phi_gain(*k, y);
      }
      out.ratio[i] = saturated_ratio(h, v, flip, p.r_max);
      out.valid[i] = 1;
    }
  }
  return out;
}

namespace {

// Normal equations of sum (du (v - y0) - dv (u - x0))^2 in coordinates
// centred on the image, accumulated row by row in raster order.
template <typename Keep>
FocusOfExpansion fit_foe(const FlowField& flow, double tau_mag, Keep keep) {
  const double ox = 0.5 * (flow.width - 1), oy = 0.5 * (flow.height - 1);
  double m11 = 0, m12 = 0, m22 = 0, r1 = 0, r2 = 0;
  std::size_t count = 0;
  for (int y = 0; y < flow.height; ++y) {
    double s11 = 0, s12 = 0, s22 = 0, t1 = 0, t2 = 0;
    for (int x = 0; x < flow.width; ++x) {
      const size_t i = flow.index(x, y);
      const double du = flow.du[i], dv = flow.dv[i];
      if (!flow.valid[i] || std::hypot(du, dv) < tau_mag || !keep(x, y, du, dv)) continue;
      // residual = dv*x0 - du*y0 - (dv*u - du*v)
      const double u = x - ox, v = y - oy;
      const double c = dv * u - du * v;
      s11 += dv * dv;
      s12 -= du * dv;
      s22 += du * du;
      t1 += dv * c;
      t2 -= du * c;
      ++count;
    }
    m11 += s11;
    m12 += s12;
    m22 += s22;
    r1 += t1;
    r2 += t2;
  }
  if (count < 2) throw DegenerateGeometryError("FoE fit needs at least two pixels with |d| >= tau_mag");

  const double tr = m11 + m22;
  const double disc = std::sqrt(0.25 * (m11 - m22) * (m11 - m22) + m12 * m12);
  const double lmax = 0.5 * tr + disc, lmin = 0.5 * tr - disc;
  const double cond = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(cond <= 1e8))
    throw DegenerateGeometryError("FoE normal matrix is ill-conditioned (flow lines nearly parallel)");
  const double det = m11 * m22 - m12 * m12;
  const double x0 = (m22 * r1 - m12 * r2) / det;
  const double y0 = (m11 * r2 - m12 * r1) / det;
  double rss = 0.0;
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      const size_t i = flow.index(x, y);
      const double du = flow.du[i], dv = flow.dv[i];
      if (!flow.valid[i] || std::hypot(du, dv) < tau_mag || !keep(x, y, du, dv)) continue;
      const double res = du * ((y - oy) - y0) - dv * ((x - ox) - x0);
      rss += res * res;
    }
  }

  FocusOfExpansion foe;
  foe.x0 = x0 + ox;
  foe.y0 = y0 + oy;
  foe.rms_residual = std::sqrt(rss / static_cast<double>(count));
  foe.condition = std::max(1.0, cond);
  return foe;
}

}  // namespace

FocusOfExpansion estimate_foe(const FlowField& flow, double tau_mag) {
  return fit_foe(flow, tau_mag, [](int, int, double, double) { return true; });
}

FocusOfExpansion refine_foe(const FlowField& flow, const FocusOfExpansion& initial, double tau_mag,
                            double tau_dir, int iterations) {
  FocusOfExpansion foe = initial;
  for (int it = 0; it < iterations; ++it) {
    try {
      foe = fit_foe(flow, tau_mag, [&](int x, int y, double du, double dv) {
        return std::abs(radial_deviation(du, dv, x, y, foe)) <= tau_dir;
      });
    } catch (const DegenerateGeometryError&) {
      break;
    }
  }
  return foe;
}

double radial_deviation(double du, double dv, double u, double v, const FocusOfExpansion& foe) {
  constexpr double pi = std::numbers::pi;
  double a = std::atan2(dv, du) - std::atan2(v - foe.y0, u - foe.x0);
  while (a <= -pi) a += 2 * pi;
  while (a > pi) a -= 2 * pi;
  return a;
}

DetectionMask detect_moving(const FlowField& flow, const FocusOfExpansion& foe, const DetectParams& p) {
  constexpr double half_pi = std::numbers::pi / 2;
  std::vector<std::uint8_t> moving(flow.size(), 0);
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      const size_t i = flow.index(x, y);
      const double du = flow.du[i], dv = flow.dv[i];
      if (!flow.valid[i] || std::hypot(du, dv) < p.tau_mag) continue;
      double a = std::abs(radial_deviation(du, dv, x, y, foe));
      if (p.unsigned_ratio && a > half_pi) a = std::numbers::pi - a;
      moving[i] = a > p.tau_dir ? 1 : 0;
    }
  }
  return label_components(flow.width, flow.height, std::move(moving), p.min_area);
}

DetectionMask label_components(int width, int height, std::vector<std::uint8_t> moving, int min_area) {
  DetectionMask out;
  out.width = width;
  out.height = height;
  out.moving = std::move(moving);
  std::vector<std::uint8_t> seen(out.moving.size(), 0);
  std::vector<size_t> members;
  for (int sy = 0; sy < height; ++sy) {
    for (int sx = 0; sx < width; ++sx) {
      const size_t s = out.index(sx, sy);
      if (!out.moving[s] || seen[s]) continue;
      members.clear();
      std::queue<size_t> q;
      q.push(s);
      seen[s] = 1;
      while (!q.empty()) {
        const size_t i = q.front();
        q.pop();
        members.push_back(i);
        const int x = static_cast<int>(i % width), y = static_cast<int>(i / width);
        auto visit = [&](int nx, int ny) {
          if (nx < 0 || ny < 0 || nx >= width || ny >= height) return;
          const size_t j = out.index(nx, ny);
          if (out.moving[j] && !seen[j]) {
            seen[j] = 1;
            q.push(j);
          }
        };
        visit(x - 1, y);
        visit(x + 1, y);
        visit(x, y - 1);
        visit(x, y + 1);
      }
      if (static_cast<int>(members.size()) < min_area) {
        for (size_t i : members) out.moving[i] = 0;
        continue;
      }
      Component c;
      c.min_x = c.max_x = sx;
      c.min_y = c.max_y = sy;
      double sumx = 0, sumy = 0;
      for (size_t i : members) {
        const int x = static_cast<int>(i % width), y = static_cast<int>(i / width);
        c.min_x = std::min(c.min_x, x);
        c.max_x = std::max(c.max_x, x);
        c.min_y = std::min(c.min_y, y);
        c.max_y = std::max(c.max_y, y);
        sumx += x;
        sumy += y;
      }
      c.pixel_count = members.size();
      c.centroid_x = sumx / static_cast<double>(members.size());
      c.centroid_y = sumy / static_cast<double>(members.size());
      out.components.push_back(c);
    }
  }
  return out;
}

}  // namespace loom
