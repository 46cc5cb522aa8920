#pragma once

#include "morph/core.hpp"

#include <Eigen/Geometry>

namespace morph::vision {

inline constexpr double kDepthEpsilon = 1e-6;

class BehindCameraError : public Error {
 public:
  BehindCameraError(const std::string& what, double depth) : Error(what), depth_(depth) {}
  double depth() const { return depth_; }

 private:
  double depth_;
};

/// Pinhole intrinsics, pixels. No distortion.
struct CameraModel {
  double fx = 500.0, fy = 500.0;
  double cx = 320.0, cy = 240.0;
  int width = 640, height = 480;

  void validate() const;
  bool in_image(const Vec2& px) const {
    return px.x() >= 0.0 && px.y() >= 0.0 && px.x() < width && px.y() < height;
  }
};

/// x_parent = R x_child + t.
struct RigidTransform {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  /// From a unit quaternion (w, x, y, z); the quaternion is normalized.
  static RigidTransform from_quaternion(double w, double x, double y, double z, const Vec3& t);
  Eigen::Quaterniond quaternion() const { return Eigen::Quaterniond(R); }

  Vec3 apply(const Vec3& p) const { return R * p + t; }
  RigidTransform inverse() const { return {R.transpose(), -R.transpose() * t}; }
  RigidTransform operator*(const RigidTransform& o) const { return {R * o.R, R * o.t + t}; }

  /// R^T R = I and det R = 1 within tol.
  bool is_proper(double tol = 1e-10) const;
};

/// Camera-frame position of an object-frame point: wTc^-1 * wTo * X.
Vec3 to_camera(const RigidTransform& wTc, const RigidTransform& wTo, const Vec3& x_obj);

/// Pixel of a camera-frame point. Throws BehindCameraError when Z <= eps.
Vec2 project_camera(const CameraModel& cam, const Vec3& x_cam);
Vec2 project_point(const CameraModel& cam, const RigidTransform& wTc, const RigidTransform& wTo,
                   const Vec3& x_obj);

/// Camera-frame point at depth z seen at pixel px.
Vec3 back_project(const CameraModel& cam, const Vec2& px, double z);

/// d pixel / d x_cam:
///   [fx/Z, 0, -fx X/Z^2]
///   [0, fy/Z, -fy Y/Z^2]
Eigen::Matrix<double, 2, 3> image_jacobian(const CameraModel& cam, const Vec3& x_cam);

/// Pixel-space sensitivity of an object-frame displacement derivative J_k.
/// Derivative vectors transform by rotations only, so translations never
/// enter: j = jac * Rc^T * Ro * J_k.
Vec2 project_sensitivity(const Eigen::Matrix<double, 2, 3>& jac, const RigidTransform& wTc,
                         const RigidTransform& wTo, const Vec3& j_obj);

}  // namespace morph::vision
