#pragma once

#include <Eigen/Geometry>
#include <random>

#include "mvm/geometry.hpp"
#include "mvm/synth.hpp"

namespace mvm::testing {

// Camera at `position` looking at `target`, pixel-square intrinsics.
inline CameraView make_camera(int frame_id, const Vec3& position,
                              const Vec3& target, double focal = 1000.0,
                              int width = 1280, int height = 720) {
  Vec3 z = (target - position).normalized();
  Vec3 up(0.0, 0.0, 1.0);
  if (std::abs(z.dot(up)) > 0.99) up = Vec3(0.0, 1.0, 0.0);
  Vec3 x = up.cross(z).normalized();
  Vec3 y = z.cross(x);
  CameraView cam;
  cam.frame_id = frame_id;
  cam.fx = cam.fy = focal;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.width = width;
  cam.height = height;
  cam.rotation.row(0) = x;
  cam.rotation.row(1) = y;
  cam.rotation.row(2) = z;
  cam.translation = -cam.rotation * position;
  cam.validate();
  return cam;
}

// Identity-pose camera with given intrinsics (optical axis along +z).
inline CameraView identity_camera(double fx = 1.0, double fy = 1.0,
                                  double cx = 0.0, double cy = 0.0,
                                  int width = 1000, int height = 1000,
                                  int frame_id = 0) {
  CameraView cam;
  cam.frame_id = frame_id;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = cx;
  cam.cy = cy;
  cam.width = width;
  cam.height = height;
  return cam;
}

// Cameras on an arc of `arc_deg` degrees around `target` at `radius`.
inline std::vector<CameraView> arc_cameras(int count, double arc_deg,
                                           double radius, const Vec3& target,
                                           double height = 0.0,
                                           double focal = 1000.0) {
  std::vector<CameraView> cams;
  double arc = arc_deg * M_PI / 180.0;
  for (int i = 0; i < count; ++i) {
    double theta = count > 1 ? -arc / 2.0 + arc * i / (count - 1) : 0.0;
    Vec3 pos = target + Vec3(radius * std::cos(theta), radius * std::sin(theta),
                             height);
    cams.push_back(make_camera(i, pos, target, focal));
  }
  return cams;
}

// Template person translated to `at`, as 3D joint positions.
inline std::vector<Vec3> person_at(const Vec3& at) {
  std::vector<Vec3> joints;
  for (const auto& j : template_pose()) joints.push_back(j + at);
  return joints;
}

// Noiseless projection of 3D joints into a camera, full visibility,
// all confidences 1.
inline Pose2D project_pose(const std::vector<Vec3>& joints,
                           const CameraView& cam, int pose_id = 0) {
  Pose2D pose;
  pose.frame_id = cam.frame_id;
  pose.pose_id = pose_id;
  for (const auto& j : joints) {
    Vec2 px = project(j, cam);
    pose.joints.push_back({px.x() / cam.width, px.y() / cam.height});
    pose.joint_confidence.push_back(1.0);
    pose.visible.push_back(true);
  }
  pose.finalize();
  return pose;
}

}  // namespace mvm::testing
