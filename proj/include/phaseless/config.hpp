#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "phaseless/farfield.hpp"
#include "phaseless/geometry.hpp"
#include "phaseless/inversion_lsm.hpp"
#include "phaseless/phase_recovery.hpp"

namespace phaseless {

using Json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// Scene documents: see docs/config.md for the schema. Relative raster paths
/// are resolved against `base_dir`.
Scene scene_from_json(const Json& j, const std::string& base_dir = ".");
Json scene_to_json(const Scene& scene);
Scene load_scene(const std::string& path);

enum class Stage { Forward, Phaseless, Recover, Invert };
std::string to_string(Stage s);
Stage stage_from_string(const std::string& s);

struct ExperimentConfig {
  std::string config_dir = ".";
  std::string scene_path;  // empty for an inline scene
  Scene scene;
  double k = 5.0;
  int n_obs = 64, n_inc = 64;
  int quadrature_n = 128;      // nodes per obstacle component or on the rough part
  int ball_nodes = 128;        // rough surface scenes
  double margin_wavelengths = 1.0;
  double cells_per_wavelength = 64.0;  // medium scenes, free-space wavelength
  SamplingGrid lsm{-3, 3, -3, 3, 61, 61};
  int d0_index = 0;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  std::string output = "out";
  std::vector<Stage> stages{Stage::Forward, Stage::Phaseless, Stage::Recover, Stage::Invert};
  bool fix_gauge = true;
  GaugeFixOptions gauge;

  bool has_stage(Stage s) const;
  DirectionGrid obs_grid() const;
  DirectionGrid inc_grid() const;
  /// 2 pi / (k cells_per_wavelength).
  double medium_h() const;
  /// Everything that influences the numbers; output and stages excluded.
  Json canonical() const;
  /// 16 hex digits, FNV-1a over canonical().dump() and the format version.
  std::string hash() const;
  /// Hash of the inputs a stage depends on, chained through its upstream
  /// stages: forward (scene, k, grids, discretization), phaseless (+ d0,
  /// noise, seed), recover (+ gauge fix), invert (+ LSM grid, and whether
  /// recover runs).
  std::string stage_hash(Stage s) const;
  void validate() const;
};

ExperimentConfig config_from_json(const Json& j, const std::string& config_dir = ".");
/// Parses and validates; Config errors name the offending key or path.
ExperimentConfig load_config(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace phaseless
