#include "loom/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "loom/formats.hpp"

namespace loom {

PipelineError::PipelineError(std::string stage, int frame, int exit_code, const std::string& what)
    : Error(stage + (frame >= 0 ? " (frame " + std::to_string(frame) + ")" : std::string()) + ": " + what),
      stage_(std::move(stage)),
      frame_(frame),
      exit_code_(exit_code) {}

FocusOfExpansion estimate_foe_robust(const FlowField& flow, double tau_mag, double tau_dir, int refine) {
  const FocusOfExpansion foe = estimate_foe(flow, tau_mag);
  return refine > 0 ? refine_foe(flow, foe, tau_mag, tau_dir, refine) : foe;
}

namespace {

std::string numbered(const char* stem, int index, const char* ext) {
  char name[64];
  std::snprintf(name, sizeof name, "%s_%06d.%s", stem, index, ext);
  return name;
}

Frame load_frame(const fs::path& path, int index) {
  try {
    Frame f = read_gray_image(path);
    f.time_index = index;
    return f;
  } catch (const Error& e) {
    throw PipelineError("ingest", index, kExitInput, e.what());
  }
}

}  // namespace

PipelineReport run_pipeline(const RunConfig& cfg, const fs::path& frames_dir, const fs::path& out_dir) {
  std::vector<fs::path> frames;
  try {
    frames = list_frames(frames_dir);
  } catch (const Error& e) {
    throw PipelineError("ingest", -1, kExitInput, e.what());
  }
  if (frames.size() < 2)
    throw PipelineError("ingest", -1, kExitInput,
                        "need at least 2 frame_*.pgm files in " + frames_dir.string() + ", found " +
                            std::to_string(frames.size()));
  try {
    validate(cfg.flow);
  } catch (const Error& e) {
    throw PipelineError("config", -1, kExitUsage, e.what());
  }

  for (const char* sub : {"flow", "looming", "viz", "mask"}) fs::create_directories(out_dir / sub);
  std::ofstream log(out_dir / "run.log", std::ios::trunc);
  if (!log) throw PipelineError("output", -1, kExitInput, "cannot write " + (out_dir / "run.log").string());
  log << "# resolved configuration\n" << describe_config(cfg) << "# frames " << frames.size() << "\n";

  const auto start = std::chrono::steady_clock::now();
  PipelineReport report;
  Frame next = load_frame(frames[0], 0);
  for (int k = 0; k + 1 < static_cast<int>(frames.size()); ++k) {
    const Frame current = std::move(next);
    next = load_frame(frames[static_cast<size_t>(k) + 1], k + 1);
    const auto [a, b] = center_crop_common(current, next);

    FlowField flow;
    try {
      flow = farneback_flow(a, b, cfg.flow);
    } catch (const Error& e) {
      throw PipelineError("flow", k, kExitNumeric, e.what());
    }

    LoomingMap map;
    try {
      map = looming_transform(flow, cfg.intrinsics(), cfg.looming);
    } catch (const Error& e) {
      throw PipelineError("transform", k, kExitUsage, e.what());
    }

    try {
      write_flo(flow, out_dir / "flow" / numbered("flow", k, "flo"));
      write_lmap(map, out_dir / "looming" / numbered("loom", k, "lmap"));
      write_ppm(render_viz(map), out_dir / "viz" / numbered("viz", k, "ppm"));
    } catch (const Error& e) {
      throw PipelineError("output", k, kExitInput, e.what());
    }

    std::string entry;
    char line[256];
    try {
      const FocusOfExpansion foe = estimate_foe_robust(flow, cfg.detect.tau_mag, cfg.detect.tau_dir, cfg.foe_refine);
      const DetectionMask mask = detect_moving(flow, foe, cfg.detect);
      write_mask_pgm(mask, out_dir / "mask" / numbered("mask", k, "pgm"));
      std::snprintf(line, sizeof line, "pair %06d foe %.6f %.6f rms %.6g cond %.6g components %zu moving %zu\n", k,
                    foe.x0, foe.y0, foe.rms_residual, foe.condition, mask.components.size(), mask.moving_count());
      entry = line;
      for (const Component& c : mask.components) {
        std::snprintf(line, sizeof line, "  component bbox %d %d %d %d pixels %zu centroid %.3f %.3f\n", c.min_x,
                      c.min_y, c.max_x, c.max_y, c.pixel_count, c.centroid_x, c.centroid_y);
        entry += line;
      }
    } catch (const DegenerateGeometryError& e) {
      ++report.degenerate_pairs;
      std::snprintf(line, sizeof line, "pair %06d foe degenerate (", k);
      entry = std::string(line) + e.what() + "); detection skipped\n";
    } catch (const FormatError& e) {
      throw PipelineError("output", k, kExitInput, e.what());
    }
    log << entry;
    ++report.pairs;
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.pairs_per_second = report.seconds > 0.0 ? report.pairs / report.seconds : 0.0;
  log << "# pairs " << report.pairs << " degenerate " << report.degenerate_pairs << "\n";
  if (!log) throw PipelineError("output", -1, kExitInput, "failed writing run.log");
  return report;
}

void write_simulation(const SceneSpec& scene, const fs::path& out_dir) {
  validate(scene);
  fs::create_directories(out_dir / "frames");
  fs::create_directories(out_dir / "truth");
  for (int t = 0; t < scene.frames; ++t) {
    write_pgm(render_frame(scene, t), frame_path(out_dir / "frames", t));
    if (t + 1 < scene.frames) {
      write_flo(true_flow(scene, t), out_dir / "truth" / numbered("flow", t, "flo"));
      write_mask_pgm(true_mask(scene, t), out_dir / "truth" / numbered("mask", t, "pgm"));
    }
  }
  std::ofstream cfg(out_dir / "scene.cfg", std::ios::trunc);
  cfg << scene_to_config_text(scene);
  if (!cfg) throw FormatError("cannot write " + (out_dir / "scene.cfg").string());
}

}  // namespace loom
