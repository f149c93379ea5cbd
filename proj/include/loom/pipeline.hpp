#pragma once

#include <filesystem>
#include <string>

#include "loom/config.hpp"
#include "loom/error.hpp"

namespace loom {

/// Exit codes shared by the CLI.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitInput = 3, kExitNumeric = 4 };

/// Fatal pipeline failure, tagged with the stage and frame pair that failed.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, int frame, int exit_code, const std::string& what);
  const std::string& stage() const { return stage_; }
  int frame() const { return frame_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string stage_;
  int frame_;
  int exit_code_;
};

struct PipelineReport {
  int pairs = 0;
  int degenerate_pairs = 0;
  double seconds = 0.0;
  double pairs_per_second = 0.0;
};

/// Flow, looming transform, FoE and detection over every consecutive pair of
/// frame_*.pgm files in frames_dir. Writes flow/, looming/, viz/, mask/ and
/// run.log under out_dir. A degenerate FoE only skips that pair's detection.
PipelineReport run_pipeline(const RunConfig& cfg, const std::filesystem::path& frames_dir,
                            const std::filesystem::path& out_dir);

/// Renders every frame of the scene plus ground-truth flow and masks:
/// out_dir/frames, out_dir/truth, out_dir/scene.cfg.
void write_simulation(const SceneSpec& scene, const std::filesystem::path& out_dir);

/// FoE estimate followed by `refine` inlier refits.
FocusOfExpansion estimate_foe_robust(const FlowField& flow, double tau_mag, double tau_dir, int refine);

}  // namespace loom
