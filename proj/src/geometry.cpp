#include "mvm/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>

namespace mvm {

namespace {

constexpr double kMinDepth = 1e-9;
constexpr double kMinBaseline = 1e-9;

double ray_angle(const Vec3& point, const CameraView& a, const CameraView& b) {
  Vec3 ra = (point - a.optical_center()).normalized();
  Vec3 rb = (point - b.optical_center()).normalized();
  return std::acos(std::clamp(ra.dot(rb), -1.0, 1.0));
}

double max_pairwise_parallax(const Vec3& point, const std::vector<Observation>& obs) {
  double best = 0.0;
  for (size_t i = 0; i < obs.size(); ++i)
    for (size_t j = i + 1; j < obs.size(); ++j)
      best = std::max(best, ray_angle(point, *obs[i].camera, *obs[j].camera));
  return best;
}

double mean_reprojection(const Vec3& point, const std::vector<Observation>& obs) {
  double sum = 0.0;
  for (const auto& o : obs) sum += (project(point, *o.camera) - o.pixel).norm();
  return sum / static_cast<double>(obs.size());
}

}  // namespace

void CameraView::validate() const {
  Mat3 should_be_identity = rotation * rotation.transpose();
  if ((should_be_identity - Mat3::Identity()).norm() > 1e-9 ||
      std::abs(rotation.determinant() - 1.0) > 1e-9)
    throw Error("invalid-rotation", "rotation is not a proper orthonormal matrix");
  if (fx <= 0.0 || fy <= 0.0)
    throw Error("invalid-intrinsics", "focal lengths must be positive");
  if (width <= 0 || height <= 0)
    throw Error("invalid-intrinsics", "image size must be positive");
}

Mat3 CameraView::intrinsics() const {
  Mat3 K = Mat3::Identity();
  K(0, 0) = fx;
  K(1, 1) = fy;
  K(0, 2) = cx;
  K(1, 2) = cy;
  return K;
}

Vec3 CameraView::optical_center() const { return -rotation.transpose() * translation; }

Eigen::Matrix<double, 3, 4> CameraView::projection_matrix() const {
  Eigen::Matrix<double, 3, 4> Rt;
  Rt.leftCols<3>() = rotation;
  Rt.col(3) = translation;
  return intrinsics() * Rt;
}

Vec2 project(const Vec3& point, const CameraView& cam) {
  Vec3 pc = cam.to_camera(point);
  if (pc.z() <= kMinDepth)
    throw Error("behind-camera",
                "point has non-positive depth in frame " + std::to_string(cam.frame_id));
  return {cam.fx * pc.x() / pc.z() + cam.cx, cam.fy * pc.y() / pc.z() + cam.cy};
}

Mat3 fundamental_matrix(const CameraView& cam_u, const CameraView& cam_v) {
  if ((cam_u.optical_center() - cam_v.optical_center()).norm() <= kMinBaseline)
    throw Error("degenerate-baseline", "cameras share an optical center");
  Mat3 R_rel = cam_v.rotation * cam_u.rotation.transpose();
  Vec3 t_rel = cam_v.translation - R_rel * cam_u.translation;
  Mat3 t_cross;
  t_cross << 0, -t_rel.z(), t_rel.y(),
             t_rel.z(), 0, -t_rel.x(),
             -t_rel.y(), t_rel.x(), 0;
  Mat3 E = t_cross * R_rel;
  Mat3 F = cam_v.intrinsics().inverse().transpose() * E * cam_u.intrinsics().inverse();
  return F / F.norm();
}

Line2D epipolar_line(const Mat3& F, const Vec2& point) {
  Vec3 l = F * Vec3(point.x(), point.y(), 1.0);
  double n = std::hypot(l.x(), l.y());
  if (n <= 0.0)
    throw Error("degenerate-line", "epipolar line has zero normal");
  return {l.x() / n, l.y() / n, l.z() / n};
}

Point3D triangulate_dlt(const std::vector<Observation>& observations,
                        double min_parallax_rad) {
  if (observations.size() < 2)
    throw Error("insufficient-views", "triangulation needs at least 2 observations");

  // Common similarity transform over the observed pixels conditions the
  // homogeneous system (centroid to origin, mean distance sqrt(2)).
  Vec2 centroid = Vec2::Zero();
  for (const auto& o : observations) centroid += o.pixel;
  centroid /= static_cast<double>(observations.size());
  double mean_dist = 0.0;
  for (const auto& o : observations) mean_dist += (o.pixel - centroid).norm();
  mean_dist /= static_cast<double>(observations.size());
  double scale = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  Mat3 T = Mat3::Identity();
  T(0, 0) = T(1, 1) = scale;
  T(0, 2) = -scale * centroid.x();
  T(1, 2) = -scale * centroid.y();

  Eigen::MatrixXd A(2 * observations.size(), 4);
  for (size_t i = 0; i < observations.size(); ++i) {
    const auto& o = observations[i];
    Eigen::Matrix<double, 3, 4> P = T * o.camera->projection_matrix();
    Vec2 p = (T * Vec3(o.pixel.x(), o.pixel.y(), 1.0)).head<2>();
    A.row(2 * i) = o.weight * (p.x() * P.row(2) - P.row(0));
    A.row(2 * i + 1) = o.weight * (p.y() * P.row(2) - P.row(1));
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  Eigen::Vector4d X = svd.matrixV().col(3);
  if (std::abs(X(3)) < 1e-15)
    throw Error("low-parallax", "triangulated point at infinity");

  Point3D result;
  result.position = X.head<3>() / X(3);
  result.parallax = max_pairwise_parallax(result.position, observations);
  if (result.parallax < min_parallax_rad)
    throw Error("low-parallax", "max pairwise parallax below minimum");
  try {
    result.residual = mean_reprojection(result.position, observations);
  } catch (const Error&) {
    // cheirality failure: the geometry cannot support this point
    throw Error("low-parallax", "triangulated point behind a camera");
  }
  for (const auto& o : observations) result.inlier_views.push_back(o.camera->frame_id);
  return result;
}

Point3D ransac_triangulate(const std::vector<Observation>& observations,
                           const RansacParams& params) {
  if (observations.size() < 2)
    throw Error("insufficient-views", "triangulation needs at least 2 observations");

  const size_t n = observations.size();
  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<size_t> pick(0, n - 1);

  std::vector<size_t> best_inliers;
  double best_score = std::numeric_limits<double>::infinity();
  int hypotheses = 0;
  std::string first_failure;

  auto evaluate = [&](size_t i, size_t j) {
    Point3D hyp;
    try {
      hyp = triangulate_dlt({observations[i], observations[j]}, params.min_parallax_rad);
    } catch (const Error& e) {
      if (first_failure.empty()) first_failure = e.code();
      return;
    }
    ++hypotheses;
    std::vector<size_t> inliers;
    double score = 0.0;
    for (size_t k = 0; k < n; ++k) {
      double d;
      try {
        d = (project(hyp.position, *observations[k].camera) - observations[k].pixel).norm();
      } catch (const Error&) {
        continue;
      }
      if (d <= params.inlier_threshold_px) {
        inliers.push_back(k);
        score += d;
      }
    }
    if (inliers.size() > best_inliers.size() ||
        (inliers.size() == best_inliers.size() && score < best_score)) {
      best_inliers = std::move(inliers);
      best_score = score;
    }
  };

  // Small inputs: all pairs; otherwise seeded random pairs.
  size_t num_pairs = n * (n - 1) / 2;
  if (num_pairs <= static_cast<size_t>(params.iterations)) {
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) evaluate(i, j);
  } else {
    for (int it = 0; it < params.iterations; ++it) {
      size_t i = pick(rng);
      size_t j = pick(rng);
      if (i == j) continue;
      evaluate(i, j);
    }
  }

  if (best_inliers.size() < static_cast<size_t>(std::max(params.min_inliers, 2))) {
    // No viable hypothesis at all: report why triangulation itself failed.
    if (hypotheses == 0 && !first_failure.empty())
      throw Error(first_failure, "every 2-view hypothesis failed to triangulate");
    throw Error("no-consensus", "no 2-view hypothesis reached the inlier minimum");
  }

  std::vector<Observation> consensus;
  for (size_t k : best_inliers) consensus.push_back(observations[k]);
  return triangulate_dlt(consensus, params.min_parallax_rad);
}

}  // namespace mvm
