#include "loom/flow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "loom/error.hpp"
#include "loom/parallel.hpp"

namespace loom {

PolyExpansion::PolyExpansion(int w, int h) : width(w), height(h) {
  const size_t n = static_cast<size_t>(w) * h;
  for (auto* v : {&c, &b1, &b2, &a11, &a12, &a22}) v->assign(n, 0.0);
}

FlowField::FlowField(int w, int h, double fill_u, double fill_v)
    : width(w),
      height(h),
      du(static_cast<size_t>(w) * h, fill_u),
      dv(static_cast<size_t>(w) * h, fill_v),
      valid(static_cast<size_t>(w) * h, 1) {}

void validate(const FlowParams& p) {
  if (p.levels < 1) throw ConfigError("levels must be >= 1");
  if (p.iterations_per_level < 1) throw ConfigError("iterations_per_level must be >= 1");
  if (p.poly_n < 3 || p.poly_n % 2 == 0) throw ConfigError("poly_n must be an odd integer >= 3");
  if (!(p.poly_sigma > 0.0)) throw ConfigError("poly_sigma must be > 0");
  if (p.win_size < 1 || p.win_size % 2 == 0) throw ConfigError("win_size must be an odd integer");
  if (!(p.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (p.threads < 0) throw ConfigError("threads must be >= 0");
}

namespace {

// Basis order: 1, x, y, x^2, y^2, xy.
constexpr std::array<std::array<int, 2>, 6> kPowers{{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {0, 2}, {1, 1}}};

double ipow(double v, int p) { return p == 0 ? 1.0 : (p == 1 ? v : v * v); }

// Normal matrices with a smaller trace (intensity^2 / px^4) are rounding noise,
// e.g. from a constant patch.
constexpr double kMinTrace = 1e-12;

// Down-weights the outermost pixels, whose expansions lean on replicated
// padding.
double border_weight(int pos, int size) {
  static constexpr std::array<double, 5> kRamp{0.14, 0.14, 0.4472, 0.8, 1.0};
  const int d = std::min(pos, size - 1 - pos);
  return d < static_cast<int>(kRamp.size()) ? kRamp[static_cast<size_t>(d)] : 1.0;
}

}  // namespace

PolyExpansion poly_expand(const Frame& f, int poly_n, double poly_sigma, int threads) {
  if (poly_n < 3 || poly_n % 2 == 0) throw ConfigError("poly_n must be an odd integer >= 3");
  if (!(poly_sigma > 0.0)) throw ConfigError("poly_sigma must be > 0");
  if (f.width < poly_n || f.height < poly_n)
    throw DimensionError("poly_expand: frame " + std::to_string(f.width) + "x" + std::to_string(f.height) +
                         " smaller than window " + std::to_string(poly_n));

  const int r = poly_n / 2;
  std::vector<double> g(static_cast<size_t>(poly_n));
  for (int i = -r; i <= r; ++i) g[static_cast<size_t>(i + r)] = std::exp(-(i * i) / (2.0 * poly_sigma * poly_sigma));

  Eigen::Matrix<double, 6, 6> gram = Eigen::Matrix<double, 6, 6>::Zero();
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      const double w = g[static_cast<size_t>(x + r)] * g[static_cast<size_t>(y + r)];
      Eigen::Matrix<double, 6, 1> phi;
      for (int k = 0; k < 6; ++k) phi(k) = ipow(x, kPowers[k][0]) * ipow(y, kPowers[k][1]);
      gram += w * phi * phi.transpose();
    }
  }
  const Eigen::Matrix<double, 6, 6> inv = gram.ldlt().solve(Eigen::Matrix<double, 6, 6>::Identity());

  const int w = f.width, h = f.height;
  const size_t n = static_cast<size_t>(w) * h;
  // Horizontal pass: moments of order 0..2 in x.
  std::array<std::vector<double>, 3> hx;
  for (auto& v : hx) v.assign(n, 0.0);
  parallel_rows(h, threads, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double m0 = 0.0, m1 = 0.0, m2 = 0.0;
      for (int k = -r; k <= r; ++k) {
        const double v = g[static_cast<size_t>(k + r)] * f.clamped(x + k, y);
        m0 += v;
        m1 += k * v;
        m2 += k * k * v;
      }
      const size_t i = static_cast<size_t>(y) * w + x;
      hx[0][i] = m0;
      hx[1][i] = m1;
      hx[2][i] = m2;
    }
  });

  PolyExpansion out(w, h);
  parallel_rows(h, threads, [&](int y) {
    for (int x = 0; x < w; ++x) {
      Eigen::Matrix<double, 6, 1> rhs = Eigen::Matrix<double, 6, 1>::Zero();
      for (int k = -r; k <= r; ++k) {
        const int yy = std::clamp(y + k, 0, h - 1);
        const size_t j = static_cast<size_t>(yy) * w + x;
        const double gk = g[static_cast<size_t>(k + r)];
        rhs(0) += gk * hx[0][j];
        rhs(1) += gk * hx[1][j];
        rhs(2) += gk * k * hx[0][j];
        rhs(3) += gk * hx[2][j];
        rhs(4) += gk * k * k * hx[0][j];
        rhs(5) += gk * k * hx[1][j];
      }
      const Eigen::Matrix<double, 6, 1> coef = inv * rhs;
      const size_t i = out.index(x, y);
      out.c[i] = coef(0);
      out.b1[i] = coef(1);
      out.b2[i] = coef(2);
      out.a11[i] = coef(3);
      out.a22[i] = coef(4);
      out.a12[i] = 0.5 * coef(5);
    }
  });
  return out;
}

FlowField displacement_step(const PolyExpansion& e1, const PolyExpansion& e2, const FlowField& prior,
                            int win_size, double lambda, int threads) {
  if (e1.width != e2.width || e1.height != e2.height || e1.width != prior.width || e1.height != prior.height)
    throw DimensionError("displacement_step: expansions and prior differ in size");
  if (win_size < 1 || win_size % 2 == 0) throw ConfigError("win_size must be an odd integer");

  const int w = e1.width, h = e1.height;
  const size_t n = static_cast<size_t>(w) * h;

  // Per-pixel A^T A (3 unique entries) and A^T db (2 entries).
  std::array<std::vector<double>, 5> m;
  for (auto& v : m) v.assign(n, 0.0);
  parallel_rows(h, threads, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = e1.index(x, y);
      const int xr = x + static_cast<int>(std::lround(prior.du[i]));
      const int yr = y + static_cast<int>(std::lround(prior.dv[i]));
      const int xt = std::clamp(xr, 0, w - 1);
      const int yt = std::clamp(yr, 0, h - 1);
      const size_t j = e2.index(xt, yt);
      const double ox = xt - x, oy = yt - y;
      // A target outside the image carries no displacement information.
      const double scale = (xr == xt && yr == yt) ? border_weight(x, w) * border_weight(y, h) : 0.0;

      const double a11 = 0.5 * (e1.a11[i] + e2.a11[j]);
      const double a12 = 0.5 * (e1.a12[i] + e2.a12[j]);
      const double a22 = 0.5 * (e1.a22[i] + e2.a22[j]);
      const double db1 = -0.5 * (e2.b1[j] - e1.b1[i]) + a11 * ox + a12 * oy;
      const double db2 = -0.5 * (e2.b2[j] - e1.b2[i]) + a12 * ox + a22 * oy;

      m[0][i] = scale * (a11 * a11 + a12 * a12);
      m[1][i] = scale * (a12 * (a11 + a22));
      m[2][i] = scale * (a12 * a12 + a22 * a22);
      m[3][i] = scale * (a11 * db1 + a12 * db2);
      m[4][i] = scale * (a12 * db1 + a22 * db2);
    }
  });

  const int r = win_size / 2;
  const std::vector<double> kern = gaussian_kernel(win_size / 5.0, r);
  std::array<std::vector<double>, 5> tmp;
  for (auto& v : tmp) v.assign(n, 0.0);
  parallel_rows(h, threads, [&](int y) {
    for (int x = 0; x < w; ++x) {
      std::array<double, 5> s{};
      for (int k = -r; k <= r; ++k) {
        const size_t j = static_cast<size_t>(y) * w + std::clamp(x + k, 0, w - 1);
        const double kk = kern[static_cast<size_t>(k + r)];
        for (int c = 0; c < 5; ++c) s[c] += kk * m[c][j];
      }
      for (int c = 0; c < 5; ++c) tmp[c][static_cast<size_t>(y) * w + x] = s[c];
    }
  });

  FlowField out(w, h);
  parallel_rows(h, threads, [&](int y) {
    for (int x = 0; x < w; ++x) {
      std::array<double, 5> s{};
      for (int k = -r; k <= r; ++k) {
        const size_t j = static_cast<size_t>(std::clamp(y + k, 0, h - 1)) * w + x;
        const double kk = kern[static_cast<size_t>(k + r)];
        for (int c = 0; c < 5; ++c) s[c] += kk * tmp[c][j];
      }
      const size_t i = out.index(x, y);
      const double reg = lambda * (s[0] + s[2]);
      const double g11 = s[0] + reg, g12 = s[1], g22 = s[2] + reg;
      const double tr = g11 + g22;
      const double det = g11 * g22 - g12 * g12;
      const double disc = std::sqrt(std::max(0.0, 0.25 * (g11 - g22) * (g11 - g22) + g12 * g12));
      const double lmax = 0.5 * tr + disc;
      const double lmin = 0.5 * tr - disc;
      const bool ok = tr > kMinTrace && lmin > 0.0 && lmax / lmin <= 1e12 && det > 0.0;
      double du = prior.du[i], dv = prior.dv[i];
      if (ok) {
        const double nu = (g22 * s[3] - g12 * s[4]) / det;
        const double nv = (g11 * s[4] - g12 * s[3]) / det;
        if (std::isfinite(nu) && std::isfinite(nv)) {
          du = nu;
          dv = nv;
        }
      }
      out.du[i] = du;
      out.dv[i] = dv;
      out.valid[i] = ok && std::isfinite(du) && std::isfinite(dv) ? 1 : 0;
    }
  });
  return out;
}

FlowField upsample_flow(const FlowField& coarse, int width, int height) {
  FlowField out(width, height);
  for (int y = 0; y < height; ++y) {
    const double cy = std::min(0.5 * y, static_cast<double>(coarse.height - 1));
    const int y0 = static_cast<int>(std::floor(cy));
    const int y1 = std::min(y0 + 1, coarse.height - 1);
    const double fy = cy - y0;
    for (int x = 0; x < width; ++x) {
      const double cx = std::min(0.5 * x, static_cast<double>(coarse.width - 1));
      const int x0 = static_cast<int>(std::floor(cx));
      const int x1 = std::min(x0 + 1, coarse.width - 1);
      const double fx = cx - x0;
      auto lerp2 = [&](const std::vector<double>& v) {
        const double top = v[coarse.index(x0, y0)] + (v[coarse.index(x1, y0)] - v[coarse.index(x0, y0)]) * fx;
        const double bot = v[coarse.index(x0, y1)] + (v[coarse.index(x1, y1)] - v[coarse.index(x0, y1)]) * fx;
        return top + (bot - top) * fy;
      };
      const size_t i = out.index(x, y);
      out.du[i] = 2.0 * lerp2(coarse.du);
      out.dv[i] = 2.0 * lerp2(coarse.dv);
    }
  }
  return out;
}

FlowField farneback_flow(const Frame& f1, const Frame& f2, const FlowParams& p) {
  validate(p);
  if (f1.width != f2.width || f1.height != f2.height)
    throw DimensionError("farneback_flow: frames differ in size");
  if (f1.width < 16 || f1.height < 16) throw DimensionError("farneback_flow: frames must be at least 16x16");

  std::vector<Frame> pyr1{f1}, pyr2{f2};
  for (int l = 1; l < p.levels; ++l) {
    pyr1.push_back(downsample_half(pyr1.back()));
    pyr2.push_back(downsample_half(pyr2.back()));
  }
  if (pyr1.back().width < p.poly_n || pyr1.back().height < p.poly_n)
    throw DimensionError("farneback_flow: frame too small for " + std::to_string(p.levels) + " pyramid levels");

  FlowField flow;
  for (int l = p.levels - 1; l >= 0; --l) {
    const Frame& a = pyr1[static_cast<size_t>(l)];
    const Frame& b = pyr2[static_cast<size_t>(l)];
    if (l == p.levels - 1)
      flow = FlowField(a.width, a.height);
    else
      flow = upsample_flow(flow, a.width, a.height);
    const PolyExpansion e1 = poly_expand(a, p.poly_n, p.poly_sigma, p.threads);
    const PolyExpansion e2 = poly_expand(b, p.poly_n, p.poly_sigma, p.threads);
    for (int it = 0; it < p.iterations_per_level; ++it)
      flow = displacement_step(e1, e2, flow, p.win_size, p.lambda, p.threads);
  }
  return flow;
}

double mean_endpoint_error(const FlowField& a, const FlowField& b, int border) {
  if (a.width != b.width || a.height != b.height) throw DimensionError("mean_endpoint_error: size mismatch");
  double sum = 0.0;
  size_t count = 0;
  for (int y = border; y < a.height - border; ++y) {
    for (int x = border; x < a.width - border; ++x) {
      const size_t i = a.index(x, y);
      sum += std::hypot(a.du[i] - b.du[i], a.dv[i] - b.dv[i]);
      ++count;
    }
  }
  if (count == 0) throw DimensionError("mean_endpoint_error: border leaves no pixels");
  return sum / static_cast<double>(count);
}

}  // namespace loom
