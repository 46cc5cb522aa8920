#include "morph/vision/camera.hpp"

#include <cmath>

namespace morph::vision {

void CameraModel::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) throw ArgumentError("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ArgumentError("image size must be positive");
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw ArgumentError("principal point must lie inside the image");
  }
}

RigidTransform RigidTransform::from_quaternion(double w, double x, double y, double z, const Vec3& t) {
  Eigen::Quaterniond q(w, x, y, z);
  if (!(q.norm() > 0.0)) throw ArgumentError("zero quaternion");
  q.normalize();
  return {q.toRotationMatrix(), t};
}

bool RigidTransform::is_proper(double tol) const {
  return (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(R.determinant() - 1.0) <= tol;
}

Vec3 to_camera(const RigidTransform& wTc, const RigidTransform& wTo, const Vec3& x_obj) {
  return wTc.R.transpose() * (wTo.apply(x_obj) - wTc.t);
}

Vec2 project_camera(const CameraModel& cam, const Vec3& x) {
  if (!(x.z() > kDepthEpsilon)) throw BehindCameraError("point behind the camera", x.z());
  return {cam.fx * x.x() / x.z() + cam.cx, cam.fy * x.y() / x.z() + cam.cy};
}

Vec2 project_point(const CameraModel& cam, const RigidTransform& wTc, const RigidTransform& wTo,
                   const Vec3& x_obj) {
  return project_camera(cam, to_camera(wTc, wTo, x_obj));
}

Vec3 back_project(const CameraModel& cam, const Vec2& px, double z) {
  return {(px.x() - cam.cx) * z / cam.fx, (px.y() - cam.cy) * z / cam.fy, z};
}

Eigen::Matrix<double, 2, 3> image_jacobian(const CameraModel& cam, const Vec3& x) {
  if (!(x.z() > kDepthEpsilon)) throw BehindCameraError("point behind the camera", x.z());
  const double iz = 1.0 / x.z();
  Eigen::Matrix<double, 2, 3> j;
  j << cam.fx * iz, 0.0, -cam.fx * x.x() * iz * iz,
       0.0, cam.fy * iz, -cam.fy * x.y() * iz * iz;
  return j;
}

Vec2 project_sensitivity(const Eigen::Matrix<double, 2, 3>& jac, const RigidTransform& wTc,
                         const RigidTransform& wTo, const Vec3& j_obj) {
  return jac * (wTc.R.transpose() * (wTo.R * j_obj));
}

}  // namespace morph::vision
