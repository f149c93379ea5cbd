#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "loom/flow.hpp"
#include "loom/looming.hpp"
#include "loom/scene.hpp"

namespace loom {

/// Fully resolved settings for one CLI invocation. Every field has a value
/// after defaults -> THREADS env -> config file -> flags.
struct RunConfig {
  FlowParams flow;
  LoomingParams looming;
  DetectParams detect;
  int foe_refine = 3;  ///< inlier refits after the plain FoE fit; 0 disables
  SceneSpec scene;     ///< simulator scene; its intrinsics also drive angular mode
  double fps = 30.0;
  double search_window = 3.0;
  int threads = 1;

  const CameraIntrinsics& intrinsics() const { return scene.intrinsics; }
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Keys that may be given as --kebab-case flags (everything except sprite.N.*).
const std::vector<std::string>& flag_keys();

/// "poly_n" -> "poly-n".
std::string kebab(const std::string& key);

/// Sets one key. Throws ConfigError for unknown keys or unparsable values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Parses flat "key=value" lines; '#' starts a comment line.
KeyValues parse_config_text(const std::string& text);
KeyValues load_config_file(const std::filesystem::path& path);

/// Applies, in increasing precedence: env_threads (may be empty), file
/// values, flag values.
RunConfig resolve_config(const std::string& env_threads, const KeyValues& file, const KeyValues& flags);

/// Deterministic key=value dump. Threads are omitted: they never change results.
std::string describe_config(const RunConfig& cfg);

/// Scene keys only, in the same key=value format.
std::string scene_to_config_text(const SceneSpec& s);

}  // namespace loom
