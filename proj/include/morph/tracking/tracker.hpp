#pragma once

#include "morph/csv.hpp"
#include "morph/rom/evaluator.hpp"
#include "morph/vision/observation.hpp"

#include <string>
#include <vector>

namespace morph::tracking {

using vision::ObservationFrame;
using vision::RigidTransform;

class FrameUnusableError : public Error {
 public:
  using Error::Error;
};

struct TrackerConfig {
  bool robust = true;          // Huber weighting; false gives plain least squares
  double huber_delta = 2.0;    // pixels
  double lambda0 = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 0.1;
  double lambda_max = 1e12;
  int max_iterations = 50;
  double step_tol = 1e-9;      // on |delta_k| / range_k
  std::vector<int> slow_params;
  int slow_window = 15;
  // A per-frame slow estimate enters the window only when its standard
  // deviation, at one pixel of noise, is below this share of the range.
  double slow_max_std = 0.05;

  void validate(int num_params) const;
};

/// What the tracker sees of the object: the reduced model restricted to the
/// surface samples, their reference positions, the camera and the object pose.
class TrackingModel {
 public:
  TrackingModel(const mor::SeparatedSolution& sol, const fem::Mesh& mesh, const std::vector<vision::SurfaceSample>& samples,
                const vision::CameraModel& camera, const RigidTransform& wTo);

  int num_points() const { return static_cast<int>(positions_.size()); }
  int num_params() const { return eval_.num_params(); }
  const mor::ParameterSpace& parameter_space() const { return eval_.parameter_space(); }
  const rom::ReducedEvaluator& evaluator() const { return eval_; }
  const vision::CameraModel& camera() const { return camera_; }
  const RigidTransform& wTo() const { return wTo_; }
  const Vec3& position(int p) const { return positions_[p]; }

 private:
  rom::ReducedEvaluator eval_;
  std::vector<Vec3> positions_;
  vision::CameraModel camera_;
  RigidTransform wTo_;
};

/// Stacked residuals of one frame at mu. Rows 2i, 2i+1 belong to the i-th
/// kept measurement; J is d prediction / d mu, so r(mu + d) ~ r - J d.
struct ResidualSet {
  VecX r;
  VecX w;                // one Huber weight per kept measurement
  MatX J;
  std::vector<int> kept; // measurement indices
  int dropped = 0;       // behind the camera

  double cost(double huber_delta, bool robust) const;
  int inliers() const;
};

/// Huber weight of a residual norm: 1 up to delta, delta / |r| beyond.
double huber_weight(double norm, double delta);
/// Robust cost term: |r|^2 up to delta, 2 delta |r| - delta^2 beyond.
double huber_rho(double norm, double delta);

/// Throws FrameUnusableError when no measurement is usable.
ResidualSet robust_residuals(const ObservationFrame& frame, const TrackingModel& model, const VecX& mu,
                             const TrackerConfig& config);
ResidualSet robust_residuals_serial(const ObservationFrame& frame, const TrackingModel& model, const VecX& mu,
                                    const TrackerConfig& config);

struct LmStep {
  VecX delta;
  bool floored = false;  // a zero diagonal needed the absolute floor
};

/// Solves (A + lambda diag(A)) delta = J^T W r with A = J^T W J, W acting per
/// 2D measurement. Zero diagonals get an absolute floor.
LmStep lm_iterate(const MatX& J, const VecX& r, const VecX& w, double lambda);

struct FrameEstimate {
  int frame = 0;
  VecX mu;
  VecX variance;          // diag((J^T W J)^-1)
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  int inliers = 0;
  int measurements = 0;
  bool usable = true;
  std::vector<std::string> warnings;
};

/// Damped robust Gauss-Newton from mu_init. `fixed` marks parameters held at
/// their initial value.
FrameEstimate estimate_frame(const ObservationFrame& frame, const TrackingModel& model, const VecX& mu_init,
                             const TrackerConfig& config, const std::vector<bool>& fixed = {});

/// Per-frame estimation with warm starts. Slow parameters: each frame first
/// estimates everything, the slow values then follow the inverse-variance
/// weighted median of the observable per-frame estimates in the window (the
/// previous value while there are none), and the fast parameters are
/// re-estimated with the slow ones held. Frames that fail keep the last good
/// estimate and are flagged unusable.
struct SequenceResult {
  std::vector<FrameEstimate> estimates;
  std::vector<VecX> per_frame;  // unconstrained per-frame estimates
  int failed = 0;
};
SequenceResult track_sequence(const std::vector<ObservationFrame>& frames, const TrackingModel& model,
                              const VecX& mu_init, const TrackerConfig& config);

/// `frame,mu_0..mu_k,cost,iters,converged,inliers`.
CsvTable estimates_to_csv(const std::vector<FrameEstimate>& estimates, int num_params);

}  // namespace morph::tracking
