#pragma once

#include "morph/csv.hpp"
#include "morph/fem/mesh.hpp"
#include "morph/mor/separated_solution.hpp"
#include "morph/rom/binding.hpp"
#include "morph/vision/camera.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace morph::vision {

class ScenarioError : public Error {
 public:
  using Error::Error;
};

/// Material point on the CAD surface with its reference outward normal.
struct SurfaceSample {
  Vec3 position;
  Vec3 normal;
  rom::PointBinding binding;
  int face = -1;  // index into boundary_patches
};

/// Area-weighted random points on the boundary of a hex8 mesh, all bound
/// inside their host element.
std::vector<SurfaceSample> sample_surface(const fem::Mesh& mesh, int count, std::uint64_t seed);

/// Corner positions of the boundary faces, in the order used by sample_surface.
std::vector<std::array<Vec3, 4>> boundary_patches(const fem::Mesh& mesh);
std::vector<int> faces_of(const std::vector<SurfaceSample>& samples);

std::vector<rom::PointBinding> bindings_of(const std::vector<SurfaceSample>& samples);
std::vector<Vec3> positions_of(const std::vector<SurfaceSample>& samples);

struct Measurement {
  int point_id = 0;  // index into the sample list
  Vec2 px = Vec2::Zero();
  bool is_outlier = false;
};

struct ObservationFrame {
  int index = 0;
  RigidTransform wTc;
  std::vector<Measurement> measurements;
};

struct SequenceSpec {
  std::vector<VecX> mu;                  // true parameters per frame
  std::vector<RigidTransform> camera;    // wTc per frame; one entry means a static camera
  RigidTransform wTo;
  double noise_px = 0.0;
  double outlier_fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Deforms the samples with the reduced model at each frame's mu, keeps the
/// points facing the camera (reference normals rotated by wTo) that project
/// inside the image, then adds Gaussian pixel noise. A fraction of the
/// visible measurements is replaced by uniform pixels and flagged. Each
/// frame draws from its own stream seeded by (seed, frame).
std::vector<ObservationFrame> synthesize_sequence(const fem::Mesh& mesh, const mor::SeparatedSolution& sol,
                                                  const std::vector<SurfaceSample>& samples,
                                                  const CameraModel& camera, const SequenceSpec& spec);

/// `frame,point_id,u,v,is_outlier`. Camera poses are not part of the table.
CsvTable observations_to_csv(const std::vector<ObservationFrame>& frames);
/// Inverse of observations_to_csv; camera poses are taken from `camera`
/// (one entry per frame, or a single static pose).
std::vector<ObservationFrame> observations_from_csv(const CsvTable& table, const std::vector<RigidTransform>& camera,
                                                    const std::string& source);

/// Camera at `eye` looking at `target`; image rows run against `up`.
RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitZ());

}  // namespace morph::vision
