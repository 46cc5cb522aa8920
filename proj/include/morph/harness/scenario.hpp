#pragma once

#include "morph/fem/material.hpp"
#include "morph/json_io.hpp"
#include "morph/mor/parameter_space.hpp"
#include "morph/mor/separated_solution.hpp"
#include "morph/tracking/tracker.hpp"
#include "morph/vision/camera.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace morph::harness {

struct RomSpec {
  mor::BuildMethod method = mor::BuildMethod::Pgd;
  int rank = 0;             // sparse-pgd / pod: fixed rank (0 = automatic for pod)
  int max_rank = 50;        // pgd
  double enrich_tol = 1e-4; // pgd
  double energy = 0.9999;   // pod
  int samples = 0;          // 0 = full grid, otherwise a seeded random subset
};

struct ObservationSpec {
  int surface_samples = 600;
  double noise_px = 0.0;
  double outlier_fraction = 0.0;
};

struct RegistrationSpec {
  int model_samples = 6000;
  int cloud_samples = 1500;
  int background_points = 400;
  double cloud_noise = 0.0;
  double trim_fraction = 0.8;
  double init_rotation_deg = 5.0;
  double init_translation = 0.005;
  double accept_rms = 0.0;  // 0: 5 x (cloud_noise + model spacing)
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  Json mesh;                 // generator description or {"path": ...}
  fem::MaterialLaw law;
  Json problem;
  mor::ParameterSpace space;
  RomSpec rom;

  // Tracking section; absent for build-only scenarios.
  bool has_tracking = false;
  vision::CameraModel camera;
  std::vector<vision::RigidTransform> camera_path;
  vision::RigidTransform wTo;
  std::vector<VecX> trajectory;
  ObservationSpec observations;
  RegistrationSpec registration;
  tracking::TrackerConfig tracker;
  VecX mu_initial;
  std::vector<int> stress_frames;

  std::map<std::string, double> gates;
  std::string output_dir;
};

/// Parses scenario JSON. Syntax errors carry the line and column; semantic
/// errors carry the line of the offending key when it can be found.
Scenario parse_scenario(const std::string& text, const std::string& source);
/// A built-in preset name or a path to a scenario file.
Scenario load_scenario(const std::string& name_or_path);

std::vector<std::string> preset_names();
/// JSON text of a built-in preset; throws ArgumentError for unknown names.
std::string preset_text(const std::string& name);

}  // namespace morph::harness
