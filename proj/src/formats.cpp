#include "loom/formats.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "loom/error.hpp"

namespace loom {

namespace {

constexpr float kFloSentinel = 202021.25f;
constexpr float kFloUnknown = 1e9f;

std::vector<unsigned char> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed: " + path.string());
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<unsigned char>(v >> (8 * k)));
}
void put_f32(std::vector<unsigned char>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}
float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

unsigned char to_byte(double v, const fs::path& path) {
  if (!std::isfinite(v) || v < 0.0 || v > 255.0)
    throw FormatError("intensity out of [0,255] while writing " + path.string());
  return static_cast<unsigned char>(std::floor(v + 0.5));
}

// Netpbm header: magic, width, height, maxval, then exactly one whitespace byte.
struct PnmHeader {
  std::string magic;
  int width = 0, height = 0;
  std::size_t offset = 0;
};

PnmHeader parse_pnm_header(const std::vector<unsigned char>& b, const fs::path& path) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < b.size()) {
      if (b[pos] == '#') {
        while (pos < b.size() && b[pos] != '\n') ++pos;
      } else if (std::isspace(b[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto token = [&] {
    skip_space();
    std::string t;
    while (pos < b.size() && !std::isspace(b[pos]) && b[pos] != '#') t.push_back(static_cast<char>(b[pos++]));
    if (t.empty()) throw FormatError("truncated header in " + path.string());
    return t;
  };
  auto number = [&] {
    const std::string t = token();
    int v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || v < 0)
      throw FormatError("malformed header field '" + t + "' in " + path.string());
    return v;
  };
  PnmHeader h;
  h.magic = token();
  if (h.magic != "P5" && h.magic != "P6") throw FormatError("unsupported magic '" + h.magic + "' in " + path.string());
  h.width = number();
  h.height = number();
  const int maxval = number();
  if (maxval != 255) throw FormatError("maxval must be 255 in " + path.string());
  if (pos >= b.size() || !std::isspace(b[pos])) throw FormatError("malformed header in " + path.string());
  h.offset = pos + 1;
  return h;
}

std::vector<unsigned char> pnm_bytes(const char* magic, int w, int h) {
  const std::string header = std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  return {header.begin(), header.end()};
}

}  // namespace

void write_pgm(const Frame& f, const fs::path& path) {
  std::vector<unsigned char> out = pnm_bytes("P5", f.width, f.height);
  out.reserve(out.size() + f.size());
  for (double v : f.pixels) out.push_back(to_byte(v, path));
  write_all(path, out);
}

Frame read_pgm(const fs::path& path) {
  const auto bytes = read_all(path);
  const PnmHeader h = parse_pnm_header(bytes, path);
  if (h.magic != "P5") throw FormatError(path.string() + " is not a binary PGM");
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
  if (bytes.size() - h.offset < n) throw FormatError("truncated payload in " + path.string());
  Frame f(h.width, h.height);
  for (std::size_t i = 0; i < n; ++i) f.pixels[i] = bytes[h.offset + i];
  return f;
}

void write_ppm(const ColorFrame& c, const fs::path& path) {
  std::vector<unsigned char> out = pnm_bytes("P6", c.width, c.height);
  out.reserve(out.size() + c.rgb.size());
  for (double v : c.rgb) out.push_back(to_byte(v, path));
  write_all(path, out);
}

ColorFrame read_ppm(const fs::path& path) {
  const auto bytes = read_all(path);
  const PnmHeader h = parse_pnm_header(bytes, path);
  if (h.magic != "P6") throw FormatError(path.string() + " is not a binary PPM");
  ColorFrame c(h.width, h.height);
  if (bytes.size() - h.offset < c.rgb.size()) throw FormatError("truncated payload in " + path.string());
  for (std::size_t i = 0; i < c.rgb.size(); ++i) c.rgb[i] = bytes[h.offset + i];
  return c;
}

Frame read_gray_image(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[2] = {0, 0};
  if (!in.read(magic, 2)) throw FormatError("cannot read " + path.string());
  if (magic[0] == 'P' && magic[1] == '6') return to_grayscale(read_ppm(path));
  return read_pgm(path);
}

void write_mask_pgm(const DetectionMask& m, const fs::path& path) {
  std::vector<unsigned char> out = pnm_bytes("P5", m.width, m.height);
  for (std::uint8_t v : m.moving) out.push_back(v ? 255 : 0);
  write_all(path, out);
}

void write_flo(const FlowField& flow, const fs::path& path) {
  std::vector<unsigned char> out;
  out.reserve(12 + 8 * flow.size());
  put_f32(out, kFloSentinel);
  put_u32(out, static_cast<std::uint32_t>(flow.width));
  put_u32(out, static_cast<std::uint32_t>(flow.height));
  for (std::size_t i = 0; i < flow.size(); ++i) {
    if (!flow.valid[i]) {
      put_f32(out, kFloUnknown);
      put_f32(out, kFloUnknown);
      continue;
    }
    const auto u = static_cast<float>(flow.du[i]), v = static_cast<float>(flow.dv[i]);
    if (!std::isfinite(u) || !std::isfinite(v) || std::abs(u) >= kFloUnknown || std::abs(v) >= kFloUnknown)
      throw FormatError("non-finite or out-of-range flow while writing " + path.string());
    put_f32(out, u);
    put_f32(out, v);
  }
  write_all(path, out);
}

FlowField read_flo(const fs::path& path) {
  const auto b = read_all(path);
  if (b.size() < 12) throw FormatError("truncated .flo header in " + path.string());
  if (get_f32(b.data()) != kFloSentinel) throw FormatError("bad .flo sentinel in " + path.string());
  const auto w = static_cast<std::int32_t>(get_u32(b.data() + 4));
  const auto h = static_cast<std::int32_t>(get_u32(b.data() + 8));
  if (w < 0 || h < 0) throw FormatError("negative .flo dimensions in " + path.string());
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (b.size() != 12 + 8 * n) throw FormatError(".flo payload size does not match header in " + path.string());
  FlowField flow(w, h);
  for (std::size_t i = 0; i < n; ++i) {
    const float u = get_f32(b.data() + 12 + 8 * i);
    const float v = get_f32(b.data() + 16 + 8 * i);
    if (std::abs(u) >= kFloUnknown || std::abs(v) >= kFloUnknown || !std::isfinite(u) || !std::isfinite(v)) {
      flow.du[i] = flow.dv[i] = 0.0;
      flow.valid[i] = 0;
    } else {
      flow.du[i] = u;
      flow.dv[i] = v;
    }
  }
  return flow;
}

std::string to_string(RatioMode m) { return m == RatioMode::pixel ? "pixel" : "angular"; }

RatioMode parse_ratio_mode(const std::string& s) {
  if (s == "pixel") return RatioMode::pixel;
  if (s == "angular") return RatioMode::angular;
  throw ConfigError("unknown ratio mode '" + s + "' (expected pixel or angular)");
}

void write_lmap(const LoomingMap& m, const fs::path& path) {
  const std::string header =
      "LOOM 1 " + std::to_string(m.width) + " " + std::to_string(m.height) + " " + to_string(m.mode) + "\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(out.size() + 5 * m.ratio.size());
  for (float r : m.ratio) put_f32(out, r);
  for (std::uint8_t v : m.valid) out.push_back(v ? 1 : 0);
  write_all(path, out);
}

LoomingMap read_lmap(const fs::path& path, std::optional<RatioMode> expected) {
  const auto b = read_all(path);
  const auto nl = std::find(b.begin(), b.end(), static_cast<unsigned char>('\n'));
  if (nl == b.end()) throw FormatError("missing LMAP header line in " + path.string());
  std::istringstream header(std::string(b.begin(), nl));
  std::string magic, mode, extra;
  int version = 0, w = -1, h = -1;
  if (!(header >> magic >> version >> w >> h >> mode) || (header >> extra))
    throw FormatError("malformed LMAP header in " + path.string());
  if (magic != "LOOM" || version != 1) throw FormatError("bad LMAP magic/version in " + path.string());
  if (w < 0 || h < 0) throw FormatError("negative LMAP dimensions in " + path.string());
  RatioMode m;
  try {
    m = parse_ratio_mode(mode);
  } catch (const ConfigError&) {
    throw FormatError("unknown LMAP mode '" + mode + "' in " + path.string());
  }
  if (expected && *expected != m)
    throw FormatError("LMAP mode mismatch: file has " + mode + ", expected " + to_string(*expected));
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t off = static_cast<std::size_t>(nl - b.begin()) + 1;
  if (b.size() - off != 5 * n) throw FormatError("truncated or oversized LMAP payload in " + path.string());
  LoomingMap out(w, h, m);
  for (std::size_t i = 0; i < n; ++i) {
    out.ratio[i] = get_f32(b.data() + off + 4 * i);
    const unsigned char v = b[off + 4 * n + i];
    if (v > 1) throw FormatError("validity byte not 0/1 in " + path.string());
    out.valid[i] = v;
  }
  return out;
}

ColorFrame render_viz(const LoomingMap& m) {
  ColorFrame c(m.width, m.height);
  for (std::size_t i = 0; i < m.ratio.size(); ++i) {
    double* p = &c.rgb[3 * i];
    if (!m.valid[i]) {
      p[0] = 255.0;
      p[1] = 0.0;
      p[2] = 255.0;
      continue;
    }
    const double g = std::round(255.0 * (0.5 + std::atan(static_cast<double>(m.ratio[i])) / std::numbers::pi));
    p[0] = p[1] = p[2] = g;
  }
  return c;
}

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

ImuSeries read_imu_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(trim(line));
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw FormatError("empty IMU file " + path.string());

  const auto header = split_csv(lines[0]);
  if (header != std::vector<std::string>{"t", "ax", "ay", "az"})
    throw FormatError("IMU header must be 't,ax,ay,az' in " + path.string());

  ImuSeries s;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const auto cells = split_csv(lines[ln]);
    const std::string where = path.string() + ":" + std::to_string(ln + 1);
    if (cells.size() != 4) throw FormatError("expected 4 columns at " + where);
    double v[4];
    for (int k = 0; k < 4; ++k) {
      const std::string& c = cells[static_cast<std::size_t>(k)];
      auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v[k]);
      if (c.empty() || ec != std::errc() || p != c.data() + c.size() || !std::isfinite(v[k]))
        throw FormatError("non-numeric cell '" + c + "' at " + where);
    }
    if (!s.timestamps.empty() && !(v[0] > s.timestamps.back()))
      throw FormatError("timestamps not strictly increasing at " + where);
    s.timestamps.push_back(v[0]);
    s.ax.push_back(v[1]);
    s.ay.push_back(v[2]);
    s.az.push_back(v[3]);
  }
  if (s.size() < 2) throw FormatError("IMU series needs at least 2 samples in " + path.string());
  return s;
}

fs::path frame_path(const fs::path& dir, int index) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%06d.pgm", index);
  return dir / name;
}

std::vector<fs::path> list_frames(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) throw FormatError("frame directory not found: " + dir.string());
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    const std::string ext = e.path().extension().string();
    if (name.rfind("frame_", 0) == 0 && (ext == ".pgm" || ext == ".ppm")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace loom
