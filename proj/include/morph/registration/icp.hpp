#pragma once

#include "morph/csv.hpp"
#include "morph/json_io.hpp"
#include "morph/spatial/kdtree.hpp"
#include "morph/vision/camera.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace morph::registration {

using vision::RigidTransform;

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<int> ids;  // optional; empty means 0..n-1

  int size() const { return static_cast<int>(points.size()); }
  int id(int i) const { return ids.empty() ? i : ids[i]; }
};

struct IcpOptions {
  double trim_fraction = 1.0;   // share of correspondences kept, closest first
  int max_iterations = 200;
  double rel_tol = 1e-8;        // on the trimmed rms
  double accept_rms = std::numeric_limits<double>::infinity();
  int restarts = 16;            // random initial rotations tried when accept_rms fails
  std::uint64_t seed = 0;
};

struct IcpResult {
  RigidTransform wTo;
  double rms = 0.0;               // trimmed rms after the last correspondence update
  int iterations = 0;
  bool converged = false;
  int attempts = 1;
  double trim_fraction = 1.0;
  std::vector<double> history;    // trimmed rms per iteration, starting at init
};

class RegistrationError : public Error {
 public:
  RegistrationError(const std::string& what, IcpResult best) : Error(what), best_(std::move(best)) {}
  const IcpResult& best() const { return best_; }

 private:
  IcpResult best_;
};

/// Model surface samples (object frame) with their spatial index.
class SurfaceModel {
 public:
  explicit SurfaceModel(std::vector<Vec3> samples);
  /// Bilinear patch (corners in cyclic order) on which each sample lies.
  /// Pairs are then formed with the closest point of the patches of the
  /// nearest samples rather than with a sample, which removes the bias of
  /// pairing two different samplings of one surface.
  using Patch = std::array<Vec3, 4>;
  SurfaceModel(std::vector<Vec3> samples, std::vector<int> patch_of, std::vector<Patch> patches);
  const spatial::KdTree& tree() const { return tree_; }
  const Vec3& point(int i) const { return tree_.point(i); }
  int size() const { return tree_.size(); }
  bool has_patches() const { return !patches_.empty(); }
  /// Closest model point and squared distance.
  std::pair<Vec3, double> closest(const Vec3& p) const;
  Vec3 centroid() const { return centroid_; }
  /// Mean nearest-neighbour distance between samples.
  double spacing() const { return spacing_; }

 private:
  spatial::KdTree tree_;
  std::vector<int> patch_of_;
  std::vector<Patch> patches_;
  Vec3 centroid_;
  double spacing_;
};

/// Trimmed ICP from one initial pose: cloud points are pulled back into the
/// object frame, matched to their nearest model sample, the closest
/// trim_fraction of pairs is kept and the rigid update is the closed-form
/// least-squares fit without scaling. Pairs and distances come from
/// SurfaceModel::closest.
IcpResult icp_align(const PointCloud& cloud, const SurfaceModel& model, const RigidTransform& init,
                    const IcpOptions& options);

/// icp_align from `init`, then from `restarts` random rotations about the
/// centroids when the rms exceeds accept_rms. Throws RegistrationError with
/// the best attempt when none is accepted.
IcpResult icp_register(const PointCloud& cloud, const SurfaceModel& model, const RigidTransform& init,
                       const IcpOptions& options);

/// Nearest model sample for every cloud point (object frame). Parallel over
/// points; the serial variant is the reference.
std::vector<spatial::KdTree::Hit> match_points(const std::vector<Vec3>& pts, const SurfaceModel& model);
std::vector<spatial::KdTree::Hit> match_points_serial(const std::vector<Vec3>& pts, const SurfaceModel& model);

enum class Label { Static, Deformable, Unresolved };
const char* to_string(Label l);

/// Distance to the registered model decides: below threshold deformable,
/// from threshold up to twice it unresolved, beyond that static.
std::vector<Label> segment_points(const PointCloud& cloud, const SurfaceModel& model, const RigidTransform& wTo,
                                  double threshold);

CsvTable cloud_to_csv(const PointCloud& cloud);
PointCloud cloud_from_csv(const CsvTable& table, const std::string& source);

Json report_to_json(const IcpResult& r);

}  // namespace morph::registration
