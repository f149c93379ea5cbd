// Command-line front end: sim, flow, transform, foe, detect, viz, sync, pipeline.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>

#include "loom/formats.hpp"
#include "loom/imu_sync.hpp"
#include "loom/parallel.hpp"
#include "loom/pipeline.hpp"

namespace fs = std::filesystem;
using namespace loom;

namespace {

struct Common {
  std::string config_file;
  std::map<std::string, std::string> flags;
};

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--config", common.config_file, "flat key=value configuration file");
  for (const std::string& key : flag_keys())
    sub->add_option("--" + kebab(key), common.flags[key], "overrides '" + key + "'");
}

RunConfig resolve(const Common& common) {
  KeyValues file;
  if (!common.config_file.empty()) file = load_config_file(common.config_file);
  KeyValues flags;
  for (const auto& [k, v] : common.flags)
    if (!v.empty()) flags.emplace_back(k, v);
  const char* env = std::getenv("THREADS");
  return resolve_config(env ? env : "", file, flags);
}

int exit_code_for(const Error& e) {
  if (const auto* p = dynamic_cast<const PipelineError*>(&e)) return p->exit_code();
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const SceneError*>(&e)) return kExitUsage;
  if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const DimensionError*>(&e)) return kExitInput;
  return kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Looming-based moving object detection from a translating camera"};
  app.require_subcommand(1);
  Common common;

  std::string out, in1, in2, flow_path, lmap_path, viz_path, imu_path, expect_mode;
  bool benchmark = false;

  auto* sim = app.add_subcommand("sim", "render a synthetic scene with ground truth");
  sim->add_option("--out", out, "output directory")->required();

  auto* flow = app.add_subcommand("flow", "dense optical flow between two frames");
  flow->add_option("--in1", in1, "first frame (PGM/PPM)")->required();
  flow->add_option("--in2", in2, "second frame (PGM/PPM)")->required();
  flow->add_option("--out", out, "output .flo")->required();

  auto* transform = app.add_subcommand("transform", "looming ratio map from a flow field");
  transform->add_option("--flow", flow_path, "input .flo")->required();
  transform->add_option("--out", out, "output .lmap")->required();
  transform->add_option("--viz", viz_path, "optional visualization .ppm");

  auto* foe = app.add_subcommand("foe", "print 'x0 y0 rms_residual condition' for a flow field");
  foe->add_option("--flow", flow_path, "input .flo")->required();

  auto* detect = app.add_subcommand("detect", "moving-object mask from a flow field");
  detect->add_option("--flow", flow_path, "input .flo")->required();
  detect->add_option("--out", out, "output mask .pgm")->required();

  auto* viz = app.add_subcommand("viz", "render a looming map");
  viz->add_option("--lmap", lmap_path, "input .lmap")->required();
  viz->add_option("--out", out, "output .ppm")->required();
  viz->add_option("--expect-mode", expect_mode, "fail unless the map has this mode (pixel|angular)");

  auto* sync = app.add_subcommand("sync", "align accelerometer data with video motion");
  sync->add_option("--imu", imu_path, "CSV with header t,ax,ay,az")->required();
  sync->add_option("--flows", in1, "directory of flow_*.flo files in frame order")->required();

  auto* pipeline = app.add_subcommand("pipeline", "full run over a directory of frames");
  pipeline->add_option("--input", in1, "directory of frame_*.pgm")->required();
  pipeline->add_option("--out", out, "output directory")->required();
  pipeline->add_flag("--benchmark", benchmark, "print throughput in frames/second");

  for (auto* sub : {sim, flow, transform, foe, detect, viz, sync, pipeline}) add_common(sub, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const RunConfig cfg = resolve(common);

    if (sim->parsed()) {
      write_simulation(cfg.scene, out);
      std::printf("wrote %d frames to %s\n", cfg.scene.frames, (fs::path(out) / "frames").string().c_str());
    } else if (flow->parsed()) {
      const auto [a, b] = center_crop_common(read_gray_image(in1), read_gray_image(in2));
      write_flo(farneback_flow(a, b, cfg.flow), out);
    } else if (transform->parsed()) {
      const LoomingMap map = looming_transform(read_flo(flow_path), cfg.intrinsics(), cfg.looming);
      write_lmap(map, out);
      if (!viz_path.empty()) write_ppm(render_viz(map), viz_path);
    } else if (foe->parsed()) {
      const FocusOfExpansion f =
          estimate_foe_robust(read_flo(flow_path), cfg.detect.tau_mag, cfg.detect.tau_dir, cfg.foe_refine);
      std::printf("%.6f %.6f %.6g %.6g\n", f.x0, f.y0, f.rms_residual, f.condition);
    } else if (detect->parsed()) {
      const FlowField field = read_flo(flow_path);
      const FocusOfExpansion f = estimate_foe_robust(field, cfg.detect.tau_mag, cfg.detect.tau_dir, cfg.foe_refine);
      const DetectionMask mask = detect_moving(field, f, cfg.detect);
      write_mask_pgm(mask, out);
      std::printf("components %zu moving %zu\n", mask.components.size(), mask.moving_count());
      for (const Component& c : mask.components)
        std::printf("bbox %d %d %d %d pixels %zu centroid %.3f %.3f\n", c.min_x, c.min_y, c.max_x, c.max_y,
                    c.pixel_count, c.centroid_x, c.centroid_y);
    } else if (viz->parsed()) {
      std::optional<RatioMode> expected;
      if (!expect_mode.empty()) expected = parse_ratio_mode(expect_mode);
      write_ppm(render_viz(read_lmap(lmap_path, expected)), out);
    } else if (sync->parsed()) {
      std::vector<fs::path> paths;
      for (const auto& e : fs::directory_iterator(in1))
        if (e.path().extension() == ".flo") paths.push_back(e.path());
      std::sort(paths.begin(), paths.end());
      std::vector<FlowField> flows;
      for (const auto& p : paths) flows.push_back(read_flo(p));
      const MotionTrace trace = vertical_motion_series(flows, cfg.fps);
      const Alignment a = estimate_offset(read_imu_csv(imu_path), trace, cfg.search_window);
      std::printf("offset %.6f peak %.6f lag_frames %d\n", a.offset, a.peak, a.lag_frames);
    } else if (pipeline->parsed()) {
      const PipelineReport r = run_pipeline(cfg, in1, out);
      if (r.degenerate_pairs > 0)
        std::fprintf(stderr, "warning: %d of %d pairs had a degenerate FoE; detection skipped (see run.log)\n",
                     r.degenerate_pairs, r.pairs);
      if (benchmark)
        std::printf("throughput %.3f frames/s (%d pairs in %.3f s, %d threads)\n", r.pairs_per_second, r.pairs,
                    r.seconds, resolve_threads(cfg.threads));
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
  return kExitOk;
}
