#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "mvm/error.hpp"

namespace mvm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole camera for one frame: intrinsics plus world-to-camera pose.
struct CameraView {
  int frame_id = -1;
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  Mat3 rotation = Mat3::Identity();   // world -> camera
  Vec3 translation = Vec3::Zero();    // world -> camera

  // Throws on a non-orthonormal rotation or non-positive focal/size.
  void validate() const;

  Mat3 intrinsics() const;
  Vec3 optical_center() const;        // camera center in world coordinates
  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
  Eigen::Matrix<double, 3, 4> projection_matrix() const;
};

/// Normalized image line a*x + b*y + c = 0 with a^2 + b^2 = 1, so the
/// point-line distance is |a*x + b*y + c|.
struct Line2D {
  double a = 0.0, b = 0.0, c = 0.0;

  double distance(const Vec2& p) const { return std::abs(a * p.x() + b * p.y() + c); }
};

/// One triangulated 3D point with its quality statistics.
struct Point3D {
  Vec3 position = Vec3::Zero();
  double residual = 0.0;              // mean reprojection distance, pixels
  std::vector<int> inlier_views;      // frame_ids of views used in the fit
  double parallax = 0.0;              // max pairwise ray angle, radians
};

struct Observation {
  const CameraView* camera = nullptr;
  Vec2 pixel = Vec2::Zero();
  double weight = 1.0;
};

struct RansacParams {
  int iterations = 100;
  double inlier_threshold_px = 10.0;
  int min_inliers = 2;
  double min_parallax_rad = 1.0 * M_PI / 180.0;
  std::uint64_t seed = 0;
};

Vec2 project(const Vec3& point, const CameraView& cam);

// Analytic fundamental matrix from calibrated poses, unit Frobenius norm,
// satisfying p_v^T F p_u = 0.
Mat3 fundamental_matrix(const CameraView& cam_u, const CameraView& cam_v);

Line2D epipolar_line(const Mat3& F, const Vec2& point);

Point3D triangulate_dlt(const std::vector<Observation>& observations,
                        double min_parallax_rad = 1.0 * M_PI / 180.0);

Point3D ransac_triangulate(const std::vector<Observation>& observations,
                           const RansacParams& params);

}  // namespace mvm
