#pragma once

#include "morph/fem/mesh.hpp"
#include "morph/harness/scenario.hpp"
#include "morph/mor/load_separation.hpp"
#include "morph/mor/metrics.hpp"
#include "morph/mor/snapshots.hpp"
#include "morph/registration/icp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace morph::harness {

/// Mesh, law and boundary-condition family described by a scenario.
struct Problem {
  fem::Mesh mesh;
  fem::MaterialLaw law;
  mor::ParameterSpace space;
  mor::LoadFamily family;                   // snapshot-based builders
  std::optional<mor::LoadMatrix> moving;    // moving-load problems (pgd)
};

Problem make_problem(const Scenario& sc);

struct BuildResult {
  mor::SeparatedSolution solution;
  std::vector<mor::ModeErrorPoint> curve;
  std::vector<double> relative_l2;  // per curve rank, against the reference
  double compression = 0.0;
  std::vector<std::string> warnings;
};

/// Offline stage. Also returns the full-FEM reference used for the curve.
BuildResult build_rom(const Scenario& sc, const Problem& pb, mor::SnapshotSet* reference = nullptr);

/// Writes solution.msol, mode_error_curve.csv, build_report.json and, for
/// single-parameter problems, param_modes.csv and response_surface.csv.
BuildResult cmd_build(const Scenario& sc, const std::string& out_dir);

struct ErrorMetrics {
  std::vector<double> distances;
  double mean = 0.0, median = 0.0, q1 = 0.0, q3 = 0.0, max = 0.0;
};

/// Euclidean distance per point; throws ArgumentError when empty or sizes differ.
ErrorMetrics compute_error_metrics(const std::vector<Vec3>& estimated, const std::vector<Vec3>& truth);
/// Same statistics of plain values.
ErrorMetrics summarize(std::vector<double> values);

struct TrackResult {
  registration::IcpResult registration;
  int static_points = 0, deformable_points = 0, unresolved_points = 0;
  tracking::SequenceResult robust;
  std::optional<tracking::SequenceResult> least_squares;
  std::vector<double> theta_error;              // |mu_0 - truth| / range, per frame
  std::vector<double> slow_error;               // first slow parameter, |running - truth|
  ErrorMetrics surface;                         // all frames, all samples
  ErrorMetrics param_error_robust, param_error_ls;  // |mu - truth| / range over frames and parameters
  int failed_frames = 0;
};

/// Synthetic online stage: observations, registration, tracking.
TrackResult run_tracking(const Scenario& sc, const Problem& pb, const mor::SeparatedSolution& sol, bool paired_ls);

/// Writes observations.csv, cloud.csv, registration.json, truth.csv,
/// estimates.csv (estimates_ls.csv when paired), surface_est.csv,
/// surface_truth.csv, stress_<frame>.csv and track_report.json.
TrackResult cmd_track(const Scenario& sc, const mor::SeparatedSolution& sol, const std::string& out_dir, bool paired_ls);

/// Gate name -> (value, threshold, pass).
struct GateOutcome {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};
std::vector<GateOutcome> evaluate_build_gates(const Scenario& sc, const BuildResult& r);
std::vector<GateOutcome> evaluate_track_gates(const Scenario& sc, const TrackResult& r);

}  // namespace morph::harness
