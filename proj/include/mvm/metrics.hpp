#pragma once

#include <optional>

#include "mvm/matching.hpp"
#include "mvm/skeleton.hpp"

namespace mvm {

struct EvalReport {
  double mean_reprojection_px = 0.0;
  double mean_group_size = 0.0;
  int outlier_count = 0;          // 2D joints rejected by RANSAC
  double c_var = 0.0;             // squared scene units
  std::optional<double> pa_mpjpe;
  std::optional<double> clustering_f1;
};

// Mean pixel distance between projected valid joints and their visible
// observations over the group members.
double reprojection_error_px(const Skeleton3D& skeleton, const PoseGroup& group,
                             const std::vector<Pose2D>& poses,
                             const std::vector<CameraView>& cameras);

// Cross-view consistency of one person's detections: per joint, variance of
// all pairwise two-view triangulations around their mean, summed over
// joints. Pairs enter only when both joint confidences reach tau.
double c_var(const std::vector<Pose2D>& detections,
             const std::vector<CameraView>& cameras, double tau);

// Mean per-joint distance after optimal similarity (Procrustes) alignment
// of the prediction onto the ground truth; reflections excluded.
double pa_mpjpe(const Skeleton3D& predicted, const Skeleton3D& ground_truth);

// Pairwise same-group precision/recall F1 of a partition against
// ground-truth identity labels keyed by (frame_id, pose_id).
double clustering_f1(const Partition& partition,
                     const std::map<std::pair<int, int>, int>& labels);

}  // namespace mvm
