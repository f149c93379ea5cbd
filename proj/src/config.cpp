#include "loom/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "loom/error.hpp"
#include "loom/formats.hpp"

namespace loom {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const std::string v = trim(value);
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("invalid value '" + value + "' for key " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("invalid boolean '" + value + "' for key " + key);
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

template <typename T, typename Get>
Setter number(Get get) {
  return [get](RunConfig& c, const std::string& k, const std::string& v) { get(c) = parse_number<T>(k, v); };
}

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"width", number<int>([](RunConfig& c) -> int& { return c.scene.width; })},
      {"height", number<int>([](RunConfig& c) -> int& { return c.scene.height; })},
      {"fx", number<double>([](RunConfig& c) -> double& { return c.scene.intrinsics.fx; })},
      {"fy", number<double>([](RunConfig& c) -> double& { return c.scene.intrinsics.fy; })},
      {"cx", number<double>([](RunConfig& c) -> double& { return c.scene.intrinsics.cx; })},
      {"cy", number<double>([](RunConfig& c) -> double& { return c.scene.intrinsics.cy; })},
      {"plane_depth", number<double>([](RunConfig& c) -> double& { return c.scene.plane_depth; })},
      {"texture_seed", number<std::uint64_t>([](RunConfig& c) -> std::uint64_t& { return c.scene.texture_seed; })},
      {"texture_scale", number<double>([](RunConfig& c) -> double& { return c.scene.texture_scale; })},
      {"vel_x", number<double>([](RunConfig& c) -> double& { return c.scene.vel_x; })},
      {"vel_y", number<double>([](RunConfig& c) -> double& { return c.scene.vel_y; })},
      {"vel_z", number<double>([](RunConfig& c) -> double& { return c.scene.vel_z; })},
      {"frames", number<int>([](RunConfig& c) -> int& { return c.scene.frames; })},
      {"levels", number<int>([](RunConfig& c) -> int& { return c.flow.levels; })},
      {"iterations", number<int>([](RunConfig& c) -> int& { return c.flow.iterations_per_level; })},
      {"poly_n", number<int>([](RunConfig& c) -> int& { return c.flow.poly_n; })},
      {"poly_sigma", number<double>([](RunConfig& c) -> double& { return c.flow.poly_sigma; })},
      {"win_size", number<int>([](RunConfig& c) -> int& { return c.flow.win_size; })},
      {"lambda", number<double>([](RunConfig& c) -> double& { return c.flow.lambda; })},
      {"eps_den", number<double>([](RunConfig& c) -> double& { return c.looming.eps_den; })},
      {"r_max", number<double>([](RunConfig& c) -> double& { return c.looming.r_max; })},
      {"tau_mag",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.looming.tau_mag = c.detect.tau_mag = parse_number<double>(k, v);
       }},
      {"tau_dir", number<double>([](RunConfig& c) -> double& { return c.detect.tau_dir; })},
      {"min_area", number<int>([](RunConfig& c) -> int& { return c.detect.min_area; })},
      {"mode", [](RunConfig& c, const std::string&, const std::string& v) { c.looming.mode = parse_ratio_mode(trim(v)); }},
      {"orientation",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const std::string t = trim(v);
         if (t == "theta_over_phi")
           c.looming.orientation = RatioOrientation::theta_over_phi;
         else if (t == "phi_over_theta")
           c.looming.orientation = RatioOrientation::phi_over_theta;
         else
           throw ConfigError("invalid value '" + v + "' for key " + k + " (theta_over_phi|phi_over_theta)");
       }},
      {"unsigned_ratio",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.detect.unsigned_ratio = parse_bool(k, v); }},
      {"foe_refine", number<int>([](RunConfig& c) -> int& { return c.foe_refine; })},
      {"fps", number<double>([](RunConfig& c) -> double& { return c.fps; })},
      {"search_window", number<double>([](RunConfig& c) -> double& { return c.search_window; })},
      {"threads",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.threads = c.flow.threads = parse_number<int>(k, v);
         if (c.threads < 0) throw ConfigError("threads must be >= 0");
       }},
  };
  return table;
}

void apply_sprite_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  // sprite.N.field
  const auto dot = key.find('.', 7);
  if (dot == std::string::npos) throw ConfigError("malformed sprite key " + key);
  const auto n = parse_number<std::size_t>(key, key.substr(7, dot - 7));
  if (n > 1000) throw ConfigError("sprite index too large in " + key);
  const std::string field = key.substr(dot + 1);
  if (cfg.scene.sprites.size() <= n) cfg.scene.sprites.resize(n + 1);
  Sprite& sp = cfg.scene.sprites[n];
  static const std::map<std::string, double Sprite::*> fields = {
      {"depth", &Sprite::depth},     {"size_w", &Sprite::size_w}, {"size_h", &Sprite::size_h},
      {"start_x", &Sprite::start_x}, {"start_y", &Sprite::start_y}, {"vel_x", &Sprite::vel_x},
      {"vel_y", &Sprite::vel_y},     {"albedo", &Sprite::albedo_offset}};
  const auto it = fields.find(field);
  if (it == fields.end()) throw ConfigError("unknown sprite field in key " + key);
  sp.*(it->second) = parse_number<double>(key, value);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const std::vector<std::string>& flag_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

std::string kebab(const std::string& key) {
  std::string out = key;
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key.rfind("sprite.", 0) == 0) return apply_sprite_setting(cfg, key, value);
  for (const auto& [name, set] : setters()) {
    if (name == key) return set(cfg, key, value);
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

KeyValues parse_config_text(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    out.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return out;
}

KeyValues load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

RunConfig resolve_config(const std::string& env_threads, const KeyValues& file, const KeyValues& flags) {
  RunConfig cfg;
  if (!trim(env_threads).empty()) apply_setting(cfg, "threads", env_threads);
  for (const auto& [k, v] : file) apply_setting(cfg, k, v);
  for (const auto& [k, v] : flags) apply_setting(cfg, k, v);
  return cfg;
}

std::string scene_to_config_text(const SceneSpec& s) {
  std::ostringstream out;
  out << "width=" << s.width << "\nheight=" << s.height << "\nfx=" << fmt(s.intrinsics.fx)
      << "\nfy=" << fmt(s.intrinsics.fy) << "\ncx=" << fmt(s.intrinsics.cx) << "\ncy=" << fmt(s.intrinsics.cy)
      << "\nplane_depth=" << fmt(s.plane_depth) << "\ntexture_seed=" << s.texture_seed
      << "\ntexture_scale=" << fmt(s.texture_scale) << "\nvel_x=" << fmt(s.vel_x) << "\nvel_y=" << fmt(s.vel_y)
      << "\nvel_z=" << fmt(s.vel_z) << "\nframes=" << s.frames << "\n";
  for (std::size_t n = 0; n < s.sprites.size(); ++n) {
    const Sprite& sp = s.sprites[n];
    const std::string p = "sprite." + std::to_string(n) + ".";
    out << p << "depth=" << fmt(sp.depth) << "\n"
        << p << "size_w=" << fmt(sp.size_w) << "\n"
        << p << "size_h=" << fmt(sp.size_h) << "\n"
        << p << "start_x=" << fmt(sp.start_x) << "\n"
        << p << "start_y=" << fmt(sp.start_y) << "\n"
        << p << "vel_x=" << fmt(sp.vel_x) << "\n"
        << p << "vel_y=" << fmt(sp.vel_y) << "\n"
        << p << "albedo=" << fmt(sp.albedo_offset) << "\n";
  }
  return out.str();
}

std::string describe_config(const RunConfig& c) {
  std::ostringstream out;
  out << scene_to_config_text(c.scene) << "levels=" << c.flow.levels << "\niterations=" << c.flow.iterations_per_level
      << "\npoly_n=" << c.flow.poly_n << "\npoly_sigma=" << fmt(c.flow.poly_sigma) << "\nwin_size=" << c.flow.win_size
      << "\nlambda=" << fmt(c.flow.lambda) << "\neps_den=" << fmt(c.looming.eps_den) << "\nr_max=" << fmt(c.looming.r_max)
      << "\ntau_mag=" << fmt(c.looming.tau_mag) << "\ntau_dir=" << fmt(c.detect.tau_dir)
      << "\nmin_area=" << c.detect.min_area << "\nmode=" << to_string(c.looming.mode) << "\norientation="
      << (c.looming.orientation == RatioOrientation::theta_over_phi ? "theta_over_phi" : "phi_over_theta")
      << "\nunsigned_ratio=" << (c.detect.unsigned_ratio ? "true" : "false") << "\nfoe_refine=" << c.foe_refine
      << "\nfps=" << fmt(c.fps) << "\nsearch_window=" << fmt(c.search_window) << "\n";
  return out.str();
}

}  // namespace loom
