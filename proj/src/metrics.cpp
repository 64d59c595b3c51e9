#include "mvm/metrics.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <map>

namespace mvm {

double reprojection_error_px(const Skeleton3D& skeleton, const PoseGroup& group,
                             const std::vector<Pose2D>& poses,
                             const std::vector<CameraView>& cameras) {
  if (skeleton.num_valid() == 0)
    throw Error("no-support", "skeleton has no valid joint");
  std::map<int, const CameraView*> cam_of;
  for (const auto& cam : cameras) cam_of[cam.frame_id] = &cam;
  std::map<std::pair<int, int>, const Pose2D*> pose_of;
  for (const auto& p : poses) pose_of[{p.frame_id, p.pose_id}] = &p;

  double sum = 0.0;
  int n = 0;
  for (const auto& key : group.members) {
    auto pit = pose_of.find(key);
    if (pit == pose_of.end())
      throw Error("index-error", "group member has no matching pose");
    const Pose2D& pose = *pit->second;
    const CameraView* cam = cam_of.at(pose.frame_id);
    for (int c = 0; c < kNumJoints; ++c) {
      if (!skeleton.joint_valid[c] || !pose.visible[c]) continue;
      try {
        sum += (project(skeleton.joints[c]->position, *cam) -
                pose.joint_px(c, *cam))
                   .norm();
        ++n;
      } catch (const Error&) {
        // joints behind a camera do not support the metric
      }
    }
  }
  if (n == 0) throw Error("no-support", "no valid joint overlaps a visible observation");
  return sum / n;
}

double c_var(const std::vector<Pose2D>& detections,
             const std::vector<CameraView>& cameras, double tau) {
  if (detections.size() < 2)
    throw Error("undefined-metric", "need at least 2 detections");
  std::map<int, const CameraView*> cam_of;
  for (const auto& cam : cameras) cam_of[cam.frame_id] = &cam;

  double total = 0.0;
  int joints_with_pairs = 0;
  for (int c = 0; c < kNumJoints; ++c) {
    std::vector<Vec3> points;
    for (size_t u = 0; u < detections.size(); ++u) {
      for (size_t v = u + 1; v < detections.size(); ++v) {
        const Pose2D& pu = detections[u];
        const Pose2D& pv = detections[v];
        if (pu.frame_id == pv.frame_id) continue;
        if (!pu.visible[c] || !pv.visible[c]) continue;
        if (std::min(pu.joint_confidence[c], pv.joint_confidence[c]) < tau)
          continue;
        const CameraView* cu = cam_of.at(pu.frame_id);
        const CameraView* cv = cam_of.at(pv.frame_id);
        try {
          points.push_back(triangulate_dlt({{cu, pu.joint_px(c, *cu), 1.0},
                                            {cv, pv.joint_px(c, *cv), 1.0}},
                                           0.0)
                               .position);
        } catch (const Error&) {
          // degenerate pair, skipped
        }
      }
    }
    if (points.empty()) continue;
    ++joints_with_pairs;
    Vec3 mean = Vec3::Zero();
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(points.size());
    double var = 0.0;
    for (const auto& p : points) var += (p - mean).squaredNorm();
    total += var / static_cast<double>(points.size());
  }
  if (joints_with_pairs == 0)
    throw Error("undefined-metric", "no admissible detection pair");
  return total;
}

double pa_mpjpe(const Skeleton3D& predicted, const Skeleton3D& ground_truth) {
  std::vector<int> common;
  for (int c = 0; c < kNumJoints; ++c)
    if (predicted.joint_valid[c] && ground_truth.joint_valid[c]) common.push_back(c);
  const int n = static_cast<int>(common.size());
  if (n < 3) throw Error("alignment-error", "fewer than 3 jointly valid joints");

  Eigen::MatrixXd X(3, n), Y(3, n);  // predicted, ground truth
  for (int i = 0; i < n; ++i) {
    X.col(i) = predicted.joints[common[i]]->position;
    Y.col(i) = ground_truth.joints[common[i]]->position;
  }
  Vec3 mx = X.rowwise().mean(), my = Y.rowwise().mean();
  X.colwise() -= mx;
  Y.colwise() -= my;

  double var_x = X.squaredNorm() / n;
  Mat3 cov = Y * X.transpose() / n;
  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(1) < 1e-12 * std::max(svd.singularValues()(0), 1e-300))
    throw Error("alignment-error", "support points are collinear");

  Vec3 d = Vec3::Ones();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(2) = -1.0;
  Mat3 R = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  double scale = svd.singularValues().dot(d) / var_x;
  if (scale <= 0.0) throw Error("alignment-error", "non-positive optimal scale");

  double err = 0.0;
  for (int i = 0; i < n; ++i) err += (scale * R * X.col(i) - Y.col(i)).norm();
  return err / n;
}

double clustering_f1(const Partition& partition,
                     const std::map<std::pair<int, int>, int>& labels) {
  std::map<std::pair<int, int>, int> predicted_group;
  int next = 0;
  for (const auto& g : partition.groups) {
    for (const auto& m : g.members) predicted_group[m] = next;
    ++next;
  }
  for (const auto& m : partition.unassigned) predicted_group[m] = next++;

  std::vector<std::pair<int, int>> keys;
  for (const auto& [k, v] : labels) {
    if (!predicted_group.count(k))
      throw Error("index-error", "labeled detection missing from partition");
    keys.push_back(k);
  }

  long tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < keys.size(); ++i) {
    for (size_t j = i + 1; j < keys.size(); ++j) {
      bool same_pred = predicted_group[keys[i]] == predicted_group[keys[j]];
      bool same_true = labels.at(keys[i]) == labels.at(keys[j]);
      if (same_pred && same_true) ++tp;
      else if (same_pred) ++fp;
      else if (same_true) ++fn;
    }
  }
  if (tp == 0) return 0.0;
  double precision = static_cast<double>(tp) / (tp + fp);
  double recall = static_cast<double>(tp) / (tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace mvm
